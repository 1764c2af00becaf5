// Sweeps the Kepler exponent and prints, per alpha, the first conjugate time
// along the one-turn circle, the verdict, and the actions of the two-turn
// circle and the collision-ejection solution over T = 4 pi.

#include <cstdio>
#include <numbers>

#include "orbmin/orbmin.hpp"

int main() {
    using namespace orbmin;
    constexpr double pi = std::numbers::pi;
    std::printf("%6s %12s %12s %10s %10s\n", "alpha", "first_conj", "verdict", "A_circ", "A_ce");
    for (int i = 1; i <= 19; ++i) {
        const double a = 0.1 * i;
        const MinimalityReport r = classify(circular_orbit(a, 2 * pi, 1));
        const auto interior = r.conjugate.interior();
        char conj[32] = "-";
        if (!interior.empty()) std::snprintf(conj, sizeof conj, "%.6f", interior.front().t);
        std::printf("%6.2f %12s %12s %10.4f %10.4f\n", a, conj, std::string(to_string(r.verdict)).c_str(),
                    action_k_circular(a, 4 * pi, 2), action_collision_ejection(a, 4 * pi));
    }
}
