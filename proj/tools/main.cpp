#include <cstdio>

int main() {
  std::puts("geopretext: CLI under construction");
  return 0;
}
