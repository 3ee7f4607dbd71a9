#include <margins/margins.hpp>

int main() { return 0; }
