#![allow(dead_code)]

use dampwave_core::RiemannProblem;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Admissible problem with `k <= k_max`, states in `[-3, 3]` (nonnegative for
/// even `k`), densities in `[0.1, 5]` and damping in `[0, 2]`.
pub fn random_problem(rng: &mut ChaCha8Rng, k_max: u32) -> RiemannProblem {
    let k = rng.gen_range(1..=k_max);
    let lo = if k % 2 == 0 { 0.0 } else { -3.0 };
    RiemannProblem::new(
        rng.gen_range(0.1..5.0),
        rng.gen_range(0.1..5.0),
        rng.gen_range(lo..3.0),
        rng.gen_range(lo..3.0),
        k,
        rng.gen_range(0.0..2.0),
    )
    .unwrap()
}

/// Like [`random_problem`] but with `u- > u+`.
pub fn random_delta(rng: &mut ChaCha8Rng, k_max: u32) -> RiemannProblem {
    loop {
        let mut p = random_problem(rng, k_max);
        if p.u_minus == p.u_plus {
            continue;
        }
        if p.u_minus < p.u_plus {
            std::mem::swap(&mut p.u_minus, &mut p.u_plus);
        }
        return p;
    }
}
