#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // training allocates and frees small matrices constantly; without a
  // high trim threshold glibc hands pages back to the kernel each time
  mallopt(M_TRIM_THRESHOLD, 128 << 20);
  mallopt(M_MMAP_THRESHOLD, 128 << 20);
#endif
  return doctest::Context(argc, argv).run();
}
