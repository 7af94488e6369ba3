use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{MdpInstance, Uncertainty, UncertaintyKind};

/// Parameters of [`gen_random`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub s1_count: usize,
    pub s2_count: usize,
    pub actions_per_state: usize,
    pub reward_range: (f64, f64),
    pub seed: u64,
}

const ALT_FRACTIONS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn weights(rng: &mut ChaCha8Rng, n: usize, low: u32) -> Vec<f64> {
    loop {
        let w: Vec<u32> = (0..n).map(|_| rng.gen_range(low..=4)).collect();
        let total: u32 = w.iter().sum();
        if total > 0 {
            return w.iter().map(|&x| f64::from(x) / f64::from(total)).collect();
        }
    }
}

/// Seeded two-stage instance with reward uncertainty and k = 1: s0 spreads
/// over s1_1..s1_n, each of those has `actions_per_state` actions with
/// random sparse distributions over t1..tm, and every terminal pays r drawn
/// from `reward_range` with r' = q r for q in {0, 1/4, 1/2, 3/4, 1}.
pub fn gen_random(spec: &RandomSpec) -> Result<MdpInstance<f64>> {
    let (lo, hi) = spec.reward_range;
    if spec.s1_count == 0 || spec.s2_count == 0 || spec.actions_per_state == 0 {
        return Err(Error::Generator("sizes must be positive".into()));
    }
    if !(lo >= 0.0 && hi > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::Generator(format!("bad reward range [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut m = MdpInstance::new(
        2,
        "s0",
        Uncertainty {
            kind: UncertaintyKind::Reward,
            budget: 1,
        },
    );
    m.add_state("s0", 0);
    let middle: Vec<String> = (1..=spec.s1_count).map(|i| format!("s{i}")).collect();
    let terminals: Vec<String> = (1..=spec.s2_count).map(|j| format!("t{j}")).collect();
    for s in &middle {
        m.add_state(s.clone(), 1);
    }
    for t in &terminals {
        m.add_state(t.clone(), 2);
    }
    let w = weights(&mut rng, middle.len(), 1);
    m.add_action("s0", "a0", middle.iter().cloned().zip(w));
    for s in &middle {
        for a in 1..=spec.actions_per_state {
            let w = weights(&mut rng, terminals.len(), 0);
            let support: Vec<(String, f64)> = terminals
                .iter()
                .cloned()
                .zip(w)
                .filter(|&(_, p)| p > 0.0)
                .collect();
            m.add_action(s, &format!("a{a}"), support);
        }
    }
    let mut capable = false;
    let mut rewards = Vec::new();
    for _ in &terminals {
        let r = if lo == hi { lo } else { rng.gen_range(lo..=hi) };
        let q = ALT_FRACTIONS[rng.gen_range(0..ALT_FRACTIONS.len())];
        capable |= r > 0.0 && q < 1.0;
        rewards.push((r, r * q));
    }
    if !capable {
        rewards[0] = (hi, 0.0);
    }
    for (t, (r, alt)) in terminals.iter().zip(rewards) {
        m.add_reward(t, r, Some(alt));
    }
    Ok(m)
}
