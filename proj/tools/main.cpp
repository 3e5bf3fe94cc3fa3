#include <cstdio>

#include "zdjscc/zdjscc.hpp"

int main() {
    std::puts("zdjscc cli placeholder");
    return 0;
}
