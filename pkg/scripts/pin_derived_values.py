"""Compute the Monte Carlo regression numbers frozen in the acceptance tests.

Run once; paste the printed values into tests/test_acceptance.py.  Worker
count comes from NOISETRANSPORT_WORKERS and does not change the numbers.
"""

import json

import numpy as np

from noisetransport import FMO_OPTIMAL_DEPHASING, LadderSpec, fmo_preset, ladder_broadened_ensemble
from noisetransport.optimizer import dephasing_sensitivity, robustness_sweep


def main() -> None:
    ens = ladder_broadened_ensemble(LadderSpec(broadening_width=1.0, samples=10_000, rng_seed=0), t_final=100.0)
    spec = fmo_preset().with_dephasing(FMO_OPTIMAL_DEPHASING)
    rob = robustness_sweep(spec, 0.2, 10_000, 10.0, seed=0)
    sens = dephasing_sensitivity(fmo_preset(), FMO_OPTIMAL_DEPHASING, [0.8, 1.0, 1.2], 5.0)
    print(
        json.dumps(
            {
                "ladder_mean": ens.mean,
                "ladder_static": ens.static_psink,
                "ladder_ratio": ens.mean / ens.static_psink,
                "ladder_clip_fraction": ens.clip_fraction,
                "robustness_mean": rob.mean,
                "robustness_std": rob.std,
                "robustness_baseline": rob.baseline,
                "robustness_relative_std": rob.std / rob.mean,
                "sensitivity_0.8_1.0_1.2": sens.tolist(),
                "sensitivity_max_shift": float(np.max(np.abs(sens - sens[1]))),
            },
            indent=2,
        )
    )


if __name__ == "__main__":
    main()
