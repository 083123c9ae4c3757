fn main() -> std::process::ExitCode {
    oppforge::cli::main()
}
