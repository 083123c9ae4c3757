#![allow(clippy::needless_range_loop)]

use oppforge_core::{GraphError, TargetGraph, TargetKind, TargetSpec};
use proptest::prelude::*;

/// Node `i` may only depend on nodes `< i`, so the graph is acyclic. Nodes
/// are inserted in a shuffled order to keep insertion order independent of
/// the topology.
#[derive(Debug, Clone)]
struct Dag {
    deps: Vec<Vec<usize>>,
    folders: Vec<Vec<String>>,
    insertion: Vec<usize>,
}

fn dag() -> impl Strategy<Value = Dag> {
    (1usize..=12).prop_flat_map(|n| {
        let deps = (0..n)
            .map(|i| proptest::sample::subsequence((0..i).collect::<Vec<_>>(), 0..=i.min(4)).prop_shuffle())
            .collect::<Vec<_>>();
        let folders = proptest::collection::vec(proptest::collection::vec("[a-e]", 0..3), n);
        let insertion = Just((0..n).collect::<Vec<_>>()).prop_shuffle();
        (deps, folders, insertion).prop_map(|(deps, folders, insertion)| Dag { deps, folders, insertion })
    })
}

fn name(i: usize) -> String {
    format!("t{i}")
}

fn build(d: &Dag) -> TargetGraph {
    let mut g = TargetGraph::new();
    for &i in &d.insertion {
        g = g
            .add_opp_target(
                TargetSpec::new(name(i), TargetKind::OppModelLibrary)
                    .sources([format!("{i}.cc")])
                    .ned_folders(d.folders[i].clone())
                    .deps(d.deps[i].iter().map(|&j| name(j))),
            )
            .unwrap();
    }
    g
}

/// Folders of `i` then of each dependency, recursively, without any
/// memoization, deduplicated by first occurrence at the end.
fn naive_folders(d: &Dag, i: usize) -> Vec<String> {
    fn walk(d: &Dag, i: usize, out: &mut Vec<String>) {
        out.extend(d.folders[i].iter().cloned());
        for &j in &d.deps[i] {
            walk(d, j, out);
        }
    }
    let mut all = Vec::new();
    walk(d, i, &mut all);
    let mut out: Vec<String> = Vec::new();
    for f in all {
        if !out.contains(&f) {
            out.push(f);
        }
    }
    out
}

/// Reachability by Floyd-Warshall.
fn closure(d: &Dag) -> Vec<Vec<bool>> {
    let n = d.deps.len();
    let mut r = vec![vec![false; n]; n];
    for i in 0..n {
        r[i][i] = true;
        for &j in &d.deps[i] {
            r[i][j] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

fn index(name: &str) -> usize {
    name[1..].parse().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn resolve_is_topological(d in dag()) {
        let order = build(&d).resolve().unwrap();
        prop_assert_eq!(order.len(), d.deps.len());
        let pos: Vec<usize> = {
            let mut p = vec![usize::MAX; d.deps.len()];
            for (k, n) in order.iter().enumerate() {
                p[index(n)] = k;
            }
            p
        };
        prop_assert!(pos.iter().all(|&p| p != usize::MAX));
        for (i, deps) in d.deps.iter().enumerate() {
            for &j in deps {
                prop_assert!(pos[j] < pos[i], "t{} must precede t{}", j, i);
            }
        }
    }

    #[test]
    fn ned_folders_match_oracles(d in dag()) {
        let g = build(&d);
        let reach = closure(&d);
        for i in 0..d.deps.len() {
            let got = g.collect_ned_folders(&name(i)).unwrap();
            prop_assert_eq!(&got, &naive_folders(&d, i));
            for f in &d.folders[i] {
                prop_assert!(got.contains(f));
            }
            for f in &got {
                prop_assert!((0..d.deps.len()).any(|j| reach[i][j] && d.folders[j].contains(f)));
            }
        }
    }

    #[test]
    fn graph_values_are_persistent(d in dag()) {
        let g = build(&d);
        let before = g.clone();
        let _ = g.add_opp_target(TargetSpec::new("extra", TargetKind::OppModelLibrary).sources(["x.cc"]));
        let _ = g.with_dependency(&name(0), &name(0));
        prop_assert_eq!(g.len(), before.len());
        prop_assert_eq!(g.resolve().unwrap(), before.resolve().unwrap());
    }

    /// A back edge closes a cycle; the reported path must follow real edges.
    #[test]
    fn cycles_are_reported(d in dag(), pick in any::<prop::sample::Index>()) {
        let n = d.deps.len();
        let edges: Vec<(usize, usize)> = d
            .deps
            .iter()
            .enumerate()
            .flat_map(|(i, ds)| ds.iter().map(move |&j| (i, j)))
            .collect();
        // Without edges, a self loop is the only cycle available.
        let (from, to) = match edges.len() {
            0 => (pick.index(n), pick.index(n)),
            len => {
                let (i, j) = edges[pick.index(len)];
                (j, i)
            }
        };
        let g = build(&d).with_dependency(&name(from), &name(to)).unwrap();
        match g.resolve() {
            Err(GraphError::CycleDetected(path)) => {
                prop_assert!(!path.is_empty());
                for w in 0..path.len() {
                    let a = g.get(&path[w]).unwrap();
                    let b = &path[(w + 1) % path.len()];
                    prop_assert!(a.deps.contains(b), "{} -> {} is not an edge", a.name, b);
                }
            }
            other => prop_assert!(false, "expected a cycle, got {:?}", other),
        }
    }
}
