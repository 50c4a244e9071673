use crate::error::{NtnError, Result};

/// UE groups, their subcarrier blocks and successive-interference-cancellation
/// decoding order.
#[derive(Debug, Clone, PartialEq)]
pub struct NomaGrouping {
    /// UE indices of every group, ascending.
    pub groups: Vec<Vec<usize>>,
    /// Subcarrier indices owned by every group.
    pub subcarriers_of_group: Vec<Vec<usize>>,
    /// Per group, UEs ordered by descending effective gain (ties by index).
    /// The first entry is decoded first.
    pub sic_order: Vec<Vec<usize>>,
}

impl NomaGrouping {
    pub fn k(&self) -> usize {
        self.groups.len()
    }

    /// Checks the partition and disjoint-coverage invariants.
    pub fn validate(&self, n_ues: usize, n_subcarriers: usize) -> Result<()> {
        let mut seen = vec![false; n_ues];
        for g in &self.groups {
            if g.is_empty() {
                return Err(NtnError::Contract("empty UE group".into()));
            }
            for &u in g {
                if u >= n_ues || seen[u] {
                    return Err(NtnError::Contract(format!("UE {u} is out of range or grouped twice")));
                }
                seen[u] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(NtnError::Contract("groups do not cover every UE".into()));
        }
        let mut owned = vec![false; n_subcarriers];
        for sc in &self.subcarriers_of_group {
            if sc.is_empty() {
                return Err(NtnError::Contract("group without subcarriers".into()));
            }
            for &s in sc {
                if s >= n_subcarriers || owned[s] {
                    return Err(NtnError::Contract(format!("subcarrier {s} is out of range or shared")));
                }
                owned[s] = true;
            }
        }
        if owned.iter().any(|o| !o) {
            return Err(NtnError::Contract("subcarrier blocks do not cover the band".into()));
        }
        Ok(())
    }
}

/// Largest-remainder split of `total` items proportionally to `weights`,
/// with every share at least one.
pub fn proportional_split(weights: &[usize], total: usize) -> Result<Vec<usize>> {
    let k = weights.len();
    if k == 0 || total < k {
        return Err(NtnError::Domain(format!("cannot split {total} subcarriers among {k} groups")));
    }
    let sum: usize = weights.iter().sum();
    if sum == 0 {
        return Err(NtnError::Domain("group sizes sum to zero".into()));
    }
    let mut share: Vec<usize> = weights.iter().map(|&w| w * total / sum).collect();
    let mut order: Vec<usize> = (0..k).collect();
    // Remainders compared exactly as fractions with the common denominator `sum`.
    order.sort_by(|&a, &b| ((weights[b] * total) % sum).cmp(&((weights[a] * total) % sum)).then(a.cmp(&b)));
    let mut left = total - share.iter().sum::<usize>();
    for &g in order.iter().cycle() {
        if left == 0 {
            break;
        }
        share[g] += 1;
        left -= 1;
    }
    while let Some(empty) = share.iter().position(|&s| s == 0) {
        let donor = (0..k).max_by(|&a, &b| share[a].cmp(&share[b]).then(b.cmp(&a))).unwrap_or(0);
        share[donor] -= 1;
        share[empty] = 1;
    }
    Ok(share)
}

/// Gives every group a contiguous block of subcarriers proportional to its
/// size and orders its members for SIC by their mean gain over that block.
/// `gains[u][s]` is the linear channel gain of UE `u` on subcarrier `s`.
pub fn allocate_subcarriers(groups: &[Vec<usize>], n_subcarriers: usize, gains: &[Vec<f64>]) -> Result<NomaGrouping> {
    let mut groups: Vec<Vec<usize>> = groups.iter().filter(|g| !g.is_empty()).cloned().collect();
    for g in groups.iter_mut() {
        g.sort_unstable();
    }
    groups.sort_by_key(|g| g[0]);
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let shares = proportional_split(&sizes, n_subcarriers)?;
    let mut next = 0;
    let mut subcarriers_of_group = Vec::with_capacity(groups.len());
    for &s in &shares {
        subcarriers_of_group.push((next..next + s).collect::<Vec<_>>());
        next += s;
    }
    let mut sic_order = Vec::with_capacity(groups.len());
    for (g, sc) in groups.iter().zip(&subcarriers_of_group) {
        let mut order = g.clone();
        let mean = |u: usize| -> f64 { sc.iter().map(|&s| gains[u][s]).sum::<f64>() / sc.len() as f64 };
        for &u in g {
            if u >= gains.len() || gains[u].len() < n_subcarriers {
                return Err(NtnError::Contract(format!("no gains for UE {u} on every subcarrier")));
            }
        }
        order.sort_by(|&a, &b| mean(b).total_cmp(&mean(a)).then(a.cmp(&b)));
        sic_order.push(order);
    }
    Ok(NomaGrouping {
        groups,
        subcarriers_of_group,
        sic_order,
    })
}
