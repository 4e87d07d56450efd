#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "qgraph/secular.hpp"

namespace qg::verify {

struct Fixture {
    std::string name;
    MetricGraph graph;
};

// interval, 3-star, stower(2,1), mandarin(3), tree31 with 2 interior vertices.
std::vector<Fixture> builtin_fixtures();

struct SuiteOptions {
    int count = 300;
    int workers = 1;
    Tolerances tol;
    int sample_domains = 40;  // records sampled for the domain / torus checks
};

// Prints one row per (fixture, check); true iff every hard check passed.
bool run_suite(const std::vector<Fixture>& fixtures, const SuiteOptions& opt, std::ostream& out);

// Injects known failures; true iff every one is detected.
bool run_negative_controls(std::ostream& out);

}  // namespace qg::verify
