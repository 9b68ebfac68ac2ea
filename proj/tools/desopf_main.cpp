#include <cstdio>
int main(){ std::puts("desopf cli placeholder"); return 0; }
