#include <cstdio>
int main(){ std::puts("pending"); return 2; }
