#include <cstdio>
int main() { std::puts("lift: pipeline CLI (under construction)"); return 0; }
