// Regenerates the bundled synthetic assets (mesh, labelings, hints, built
// segmentations, dataset). Everything is seeded, so reruns are reproducible.
#include "handcontact/synthetic.hpp"

#include <cstdio>
#include <exception>

int main(int argc, char** argv) {
    const char* root = argc > 1 ? argv[1] : "assets";
    try {
        handcontact::synthetic::write_fixtures(root);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "fixture generation failed: %s\n", e.what());
        return 1;
    }
    std::printf("fixtures written under %s\n", root);
    return 0;
}
