"""Pin the Haar normalization c_N = prod_{p<N} p! against Monte Carlo.

For small couplings the probability-normalized integral tends to 1, and at
O(1) couplings it must match the Haar average of exp tr(X U^dag Y U).
"""
import argparse
from dataclasses import dataclass

import numpy as np

from izcorr import haar_constant, hciz_probability_normalized, make_pair, mc_hciz
from izcorr.verify import random_real_spectrum


@dataclass(frozen=True)
class Config:
    max_n: int = 4
    samples: int = 200_000
    seed: int = 7


def main(cfg: Config):
    rng = np.random.default_rng(cfg.seed)
    print(f"{'N':>2} {'c_N':>10} {'I_prob(1e-3)-1':>15} {'exact':>12} {'MC':>12} {'z':>6}")
    for n in range(2, cfg.max_n + 1):
        pair = make_pair(random_real_spectrum(rng, n), random_real_spectrum(rng, n))
        small = hciz_probability_normalized(pair.scaled(1e-3)).to_complex() - 1
        exact = hciz_probability_normalized(pair).to_complex()
        est = mc_hciz(pair, cfg.samples, rng_stream=cfg.seed + n)
        c = haar_constant(n).to_complex().real
        print(f"{n:>2} {c:>10.4g} {abs(small):>15.2e} {exact.real:>12.8f} {est.mean.real:>12.8f} {est.z_score(exact):>6.2f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--max-n", type=int, default=Config.max_n)
    p.add_argument("--samples", type=int, default=Config.samples)
    p.add_argument("--seed", type=int, default=Config.seed)
    a = p.parse_args()
    main(Config(a.max_n, a.samples, a.seed))
