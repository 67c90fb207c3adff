use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::binomial;

/// All `N`-element subsets of `{0, …, K-1}` in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminantBasis {
    pub k: usize,
    pub n: usize,
    occupations: Vec<Vec<usize>>,
    masks: Vec<u64>,
    lookup: HashMap<u64, usize>,
}

impl DeterminantBasis {
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn occupations(&self) -> &[Vec<usize>] {
        &self.occupations
    }

    pub fn occupation(&self, idx: usize) -> &[usize] {
        &self.occupations[idx]
    }

    pub fn mask(&self, idx: usize) -> u64 {
        self.masks[idx]
    }

    pub fn index_of_mask(&self, mask: u64) -> Option<usize> {
        self.lookup.get(&mask).copied()
    }

    pub fn index_of(&self, occupation: &[usize]) -> Option<usize> {
        let mut mask = 0u64;
        for &p in occupation {
            if p >= self.k || mask & (1 << p) != 0 {
                return None;
            }
            mask |= 1 << p;
        }
        (occupation.len() == self.n).then(|| self.index_of_mask(mask)).flatten()
    }
}

pub fn enumerate_determinants(k: usize, n: usize, cap: usize) -> Result<DeterminantBasis> {
    if n == 0 || n > k {
        return Err(Error::invalid("N", format!("need 1 ≤ N ≤ K, got N = {n}, K = {k}")));
    }
    let size = binomial(k, n);
    if k > 64 || size > cap as u128 {
        return Err(Error::TooLarge { size, cap });
    }
    let mut occupations = Vec::with_capacity(size as usize);
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        occupations.push(cur.clone());
        // advance to the next combination
        let mut i = n;
        while i > 0 && cur[i - 1] == k - n + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        cur[i - 1] += 1;
        for j in i..n {
            cur[j] = cur[j - 1] + 1;
        }
    }
    let masks: Vec<u64> = occupations
        .iter()
        .map(|o| o.iter().fold(0u64, |m, &p| m | (1 << p)))
        .collect();
    let lookup = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    Ok(DeterminantBasis {
        k,
        n,
        occupations,
        masks,
        lookup,
    })
}

/// `N = (ν + 1)·M + r` with `0 ≤ r < M`. When `N < M` no level is full and
/// `ν = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FillingSpec {
    pub particles: usize,
    pub flux_quanta: usize,
    pub nu: i64,
    pub remainder: usize,
}

impl FillingSpec {
    pub fn new(particles: usize, flux_quanta: usize) -> Result<Self> {
        if particles == 0 {
            return Err(Error::invalid("N", "must be at least 1"));
        }
        if flux_quanta == 0 {
            return Err(Error::invalid("M", "must be at least 1"));
        }
        Ok(Self {
            particles,
            flux_quanta,
            nu: (particles / flux_quanta) as i64 - 1,
            remainder: particles % flux_quanta,
        })
    }

    pub fn filled_levels(&self) -> usize {
        (self.nu + 1) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub energy: f64,
    pub nu: i64,
    pub remainder: usize,
    pub degeneracy: u128,
    pub occupations: Vec<Vec<usize>>,
}

/// Lowest-energy occupations of the non-interacting Hamiltonian. `energies`
/// lists the one-body energies in `(n, m)` order, `M` per level, increasing
/// with `n`.
pub fn noninteracting_ground_state(filling: &FillingSpec, energies: &[f64]) -> Result<GroundState> {
    let m = filling.flux_quanta;
    if !energies.len().is_multiple_of(m) {
        return Err(Error::DimensionMismatch(format!(
            "{} energies do not form levels of degeneracy {m}",
            energies.len()
        )));
    }
    let levels = energies.len() / m;
    let full = filling.filled_levels();
    let r = filling.remainder;
    if full > levels || (r > 0 && full + 1 > levels) {
        return Err(Error::TruncationTooSmall(format!(
            "N = {} needs {} Landau levels, basis has {levels}",
            filling.particles,
            full + usize::from(r > 0)
        )));
    }
    let level = |n: usize| energies[n * m];
    let energy = m as f64 * (0..full).map(level).sum::<f64>() + if r > 0 { r as f64 * level(full) } else { 0.0 };
    let core: Vec<usize> = (0..full * m).collect();
    let occupations = if r == 0 {
        vec![core]
    } else {
        let partial = enumerate_determinants(m, r, usize::MAX)?;
        partial
            .occupations()
            .iter()
            .map(|choice| {
                core.iter()
                    .copied()
                    .chain(choice.iter().map(|&c| full * m + c))
                    .collect()
            })
            .collect()
    };
    Ok(GroundState {
        energy,
        nu: filling.nu,
        remainder: r,
        degeneracy: binomial(m, r),
        occupations,
    })
}
