#include <cstdio>
int main(int argc, char** argv){ (void)argc; (void)argv; std::puts("pending"); return 1; }
