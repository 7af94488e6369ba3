use super::staging::DagMdp;
use crate::error::{Error, Result};
use crate::mdp::{MdpInstance, Uncertainty, UncertaintyKind};

/// The 3-Partition instance: from s0 the process moves to s_i with
/// probability b_i / (nB); each s_i picks one of the bins t_1..t_n
/// (action a_j leads to t_j). All bins pay 1 and can drop to 0, k = 1, so
/// the best worst case is 1 - 1/n exactly when the b_i split into n groups
/// of sum B each.
pub fn gen_3partition(b: &[u64], big_b: u64) -> Result<MdpInstance<f64>> {
    if b.is_empty() || b.len() % 3 != 0 {
        return Err(Error::Generator(format!(
            "need 3n numbers, got {}",
            b.len()
        )));
    }
    if b.contains(&0) || big_b == 0 {
        return Err(Error::Generator("numbers must be positive".into()));
    }
    let n = b.len() / 3;
    let total: u64 = b.iter().sum();
    if total != n as u64 * big_b {
        return Err(Error::Generator(format!(
            "sum of b is {total}, expected n * B = {}",
            n as u64 * big_b
        )));
    }
    let nb = (n as u64 * big_b) as f64;
    let mut g = DagMdp::new(
        "s0",
        Uncertainty {
            kind: UncertaintyKind::Reward,
            budget: 1,
        },
    );
    for i in 1..=b.len() {
        g.state(format!("s{i}"));
    }
    for j in 1..=n {
        g.state(format!("t{j}"));
        g.reward(&format!("t{j}"), 1.0, Some(0.0));
    }
    let spread = b
        .iter()
        .enumerate()
        .map(|(i, &bi)| (format!("s{}", i + 1), bi as f64 / nb))
        .collect();
    g.action("s0", "a0", spread);
    for i in 1..=b.len() {
        for j in 1..=n {
            g.action(&format!("s{i}"), &format!("a{j}"), vec![(format!("t{j}"), 1.0)]);
        }
    }
    g.build()
}

/// Whether `b` splits into groups of sum `big_b` each, by exhaustive search.
pub fn partition_exists(b: &[u64], big_b: u64) -> bool {
    if b.is_empty() || b.len() % 3 != 0 {
        return false;
    }
    let n = b.len() / 3;
    if b.iter().sum::<u64>() != n as u64 * big_b {
        return false;
    }
    let mut order: Vec<u64> = b.to_vec();
    order.sort_unstable_by(|x, y| y.cmp(x));
    let mut bins = vec![0u64; n];
    fn place(i: usize, items: &[u64], bins: &mut [u64], cap: u64) -> bool {
        if i == items.len() {
            return bins.iter().all(|&x| x == cap);
        }
        for j in 0..bins.len() {
            if bins[j] + items[i] <= cap {
                // symmetric empty bins: try only the first
                if bins[j] == 0 && bins[..j].contains(&0) {
                    continue;
                }
                bins[j] += items[i];
                if place(i + 1, items, bins, cap) {
                    return true;
                }
                bins[j] -= items[i];
            }
        }
        false
    }
    place(0, &order, &mut bins, big_b)
}
