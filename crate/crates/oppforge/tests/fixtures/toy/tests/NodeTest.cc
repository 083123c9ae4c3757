#include "Node.h"

int main()
{
    return 0;
}
