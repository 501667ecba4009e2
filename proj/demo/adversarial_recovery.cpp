// One amplitude instance with n = 5, m = 2500: recovery succeeds below the
// sharp threshold and the decoy wins above it.

#include <cstdio>

#include "sharplad/balance.hpp"
#include "sharplad/measure.hpp"
#include "sharplad/solver.hpp"

int main() {
    using namespace sharplad;
    const Kind kind = Kind::Amplitude;
    // Minimizer of the amplitude balance at the threshold (sharplad threshold).
    const BalanceArgmin params{0.0, 0.37418};

    const GaussianEnsemble a = sample_ensemble(2500, 5, 11);
    const Signal x0 = sample_signal(5, 12);
    for (double s : {0.10, 0.15, 0.25, 0.30}) {
        const AdversaryPlan plan = build_adversary(a, x0, s, kind, params);
        const CorruptedObservation obs = corrupt(forward(a, x0, kind), kind, NoiseSpec{}, plan);
        const SolveReport rep = solve(a, obs.b, kind, SolveOptions{}, x0);
        std::printf("s=%.2f  relative error %.3e  loss(truth) %.6f  loss(decoy) %.6f\n", s,
                    relative_error(rep.estimate, x0), objective(a, obs.b, x0, kind),
                    objective(a, obs.b, plan.x_star, kind));
    }
}
