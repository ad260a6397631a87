// Copyright 2026 The qds-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Prints the forging gap of the bundled measured cost matrix and the
// signature length needed before the forging bound drops below a target.

#include "qds/qds.hpp"

#include <cmath>
#include <cstdio>

int main() {
    const auto alphabet = qds::PhaseAlphabet::from_mean_photons(8, qds::kMeasuredMeanPhotons);
    const auto cost = qds::measured_cost_matrix();
    const auto a = qds::passive_forgery_analysis(cost, alphabet, false);

    std::printf("p_original      %.4e\n", a.p_original);
    std::printf("p_forgery       [%.4e, %.4e]\n", a.p_forgery_lower, a.p_forgery_upper);
    std::printf("gap g           %.4e\n", a.gap_lower());
    std::printf("certified       %s\n", a.certified() ? "yes" : "no");

    const auto th = qds::thresholds(a.p_original, a.gap_lower());
    std::printf("s_a, s_v        %.5e, %.5e\n", th.s_a, th.s_v);

    for (double target : {1.0, 1e-2, 1e-6, 1e-10}) {
        // 2 exp(-(2/9) g^2 L) = target
        const double len = 9.0 * std::log(2.0 / target) / (2.0 * a.gap_lower() * a.gap_lower());
        std::printf("eps_forging <= %-6g needs L >= %.3e (check: %.3g)\n", target, len,
                    qds::forging_bound(a.gap_lower(), len).raw);
    }
    return 0;
}
