#pragma once

#include "handcontact/pipeline.hpp"

#include <string>
#include <vector>

namespace handcontact::cli {

struct AblationVariant {
    std::string name;
    AblationFlags flags;
};

// The configuration matrix the `ablate` subcommand runs by default:
// baseline, flattened grids, stage subsets, conditioning off, and (when a
// coarse segmentation is supplied) the coarse-segmentation variant.
std::vector<AblationVariant> default_variants(bool with_coarse);

// Entry point behind the binary: {validate, build-grids, render-prompts,
// run, eval, ablate}. Returns the process exit status; failures print a
// machine-readable one-line JSON summary to stderr.
int dispatch(const std::vector<std::string>& args);

} // namespace handcontact::cli
