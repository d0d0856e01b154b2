//! Exact sparse representation of pure states in the qutrit site space
//! (0 = spin up, 1 = spin down, 2 = hole), plus dense reduced density
//! matrices extracted from them.
//!
//! Occupation-string keys are base-3 encoded in rung-major site order with
//! site 0 as the most significant digit, so a key reads like the string.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{LadderError, Result};

/// Amplitudes below this are dropped to bound memory.
pub const PRUNE_EPS: f64 = 1e-14;

/// Unnormalized pure state as a map from occupation strings to real
/// amplitudes. Immutable by convention once built; all operations are pure.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    n_sites: usize,
    // BTreeMap keeps iteration (and so summation) order deterministic
    // across processes; output byte-stability depends on it.
    amps: BTreeMap<u64, f64>,
}

/// Multiplier for digit `site` in a key over `n_sites` sites.
#[inline]
pub fn digit_weight(n_sites: usize, site: usize) -> u64 {
    3u64.pow((n_sites - 1 - site) as u32)
}

/// Extracts the occupation digit of `site` from `key`.
#[inline]
pub fn digit(key: u64, n_sites: usize, site: usize) -> u8 {
    ((key / digit_weight(n_sites, site)) % 3) as u8
}

/// Builds a key from a digit slice (most significant first).
pub fn key_from_digits(digits: &[u8]) -> u64 {
    digits.iter().fold(0u64, |acc, &d| acc * 3 + d as u64)
}

impl SparseState {
    pub fn new(n_sites: usize) -> Self {
        assert!(n_sites >= 1 && n_sites <= 40, "site count out of range");
        SparseState {
            n_sites,
            amps: BTreeMap::new(),
        }
    }

    pub fn from_amplitudes(n_sites: usize, amps: BTreeMap<u64, f64>) -> Self {
        let mut s = SparseState { n_sites, amps };
        s.prune();
        s
    }

    /// Product string, e.g. all-holes.
    pub fn basis_string(digits: &[u8]) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(key_from_digits(digits), 1.0);
        SparseState {
            n_sites: digits.len(),
            amps,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitude(&self, key: u64) -> f64 {
        self.amps.get(&key).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&u64, &f64)> {
        self.amps.iter()
    }

    pub fn add_amplitude(&mut self, key: u64, amp: f64) {
        *self.amps.entry(key).or_insert(0.0) += amp;
    }

    pub fn add_state(&mut self, other: &SparseState, scale: f64) {
        assert_eq!(self.n_sites, other.n_sites);
        for (&k, &a) in &other.amps {
            self.add_amplitude(k, scale * a);
        }
    }

    pub fn scaled(&self, factor: f64) -> SparseState {
        let amps = self.amps.iter().map(|(&k, &a)| (k, a * factor)).collect();
        SparseState::from_amplitudes(self.n_sites, amps)
    }

    pub fn prune(&mut self) {
        self.amps.retain(|_, a| a.abs() > PRUNE_EPS);
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a * a).sum()
    }

    /// Plain-text dump: one `<occupation string> <amplitude>` line per
    /// term, keys ascending, 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("sites={}\n", self.n_sites);
        let keys: Vec<u64> = self.amps.keys().copied().collect();
        for key in keys {
            let digits: String = (0..self.n_sites)
                .map(|s| char::from(b'0' + digit(key, self.n_sites, s)))
                .collect();
            out.push_str(&format!("{} {:.16e}\n", digits, self.amps[&key]));
        }
        out
    }
}

/// Inner product of two states on the same number of sites.
pub fn inner(a: &SparseState, b: &SparseState) -> Result<f64> {
    if a.n_sites != b.n_sites {
        return Err(LadderError::SiteMismatch(a.n_sites, b.n_sites));
    }
    let (small, large) = if a.amps.len() <= b.amps.len() {
        (a, b)
    } else {
        (b, a)
    };
    Ok(small
        .amps
        .iter()
        .map(|(k, v)| v * large.amplitude(*k))
        .sum())
}

/// Hermitian positive-semidefinite matrix on a listed subset of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub sites: Vec<usize>,
    pub mat: DMatrix<f64>,
}

impl DensityMatrix {
    pub fn new(sites: Vec<usize>, mat: DMatrix<f64>) -> Self {
        let dim = 3usize.pow(sites.len() as u32);
        assert_eq!(mat.nrows(), dim);
        assert_eq!(mat.ncols(), dim);
        DensityMatrix { sites, mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..self.dim() {
            for j in (i + 1)..self.dim() {
                r = r.max((self.mat[(i, j)] - self.mat[(j, i)]).abs());
            }
        }
        r
    }

    /// Ascending eigenvalues of the (symmetrized) matrix.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let sym = (&self.mat + self.mat.transpose()) * 0.5;
        crate::linalg::sym_eigenvalues(&sym)
    }

    pub fn lambda_max(&self) -> f64 {
        *self
            .eigenvalues()
            .last()
            .expect("density matrix is non-empty")
    }

    /// Checks Hermiticity (1e-12), positivity (eigenvalues >= -1e-10) and a
    /// strictly positive trace.
    pub fn validate(&self) -> Result<()> {
        if self.hermiticity_residual() > 1e-12 {
            return Err(LadderError::FormViolation(format!(
                "hermiticity residual {}",
                self.hermiticity_residual()
            )));
        }
        if self.trace() <= 0.0 {
            return Err(LadderError::FormViolation("non-positive trace".into()));
        }
        let min = self.eigenvalues()[0];
        if min < -1e-10 {
            return Err(LadderError::FormViolation(format!(
                "negative eigenvalue {min}"
            )));
        }
        Ok(())
    }

    /// Traces the matrix down to the sites at `keep_positions` (positions
    /// into `self.sites`, ascending). The result keeps unit trace.
    pub fn partial_trace(&self, keep_positions: &[usize]) -> DensityMatrix {
        let n = self.sites.len();
        assert!(!keep_positions.is_empty() && keep_positions.len() < n);
        assert!(keep_positions.windows(2).all(|w| w[0] < w[1]));
        let traced: Vec<usize> = (0..n).filter(|p| !keep_positions.contains(p)).collect();
        let kept_dim = 3usize.pow(keep_positions.len() as u32);
        let traced_dim = 3usize.pow(traced.len() as u32);
        let mut out = DMatrix::zeros(kept_dim, kept_dim);

        let compose = |kept: usize, tr: usize| -> usize {
            let mut digits = vec![0u8; n];
            let mut kk = kept;
            for &p in keep_positions.iter().rev() {
                digits[p] = (kk % 3) as u8;
                kk /= 3;
            }
            let mut tt = tr;
            for &p in traced.iter().rev() {
                digits[p] = (tt % 3) as u8;
                tt /= 3;
            }
            digits.iter().fold(0usize, |acc, &d| acc * 3 + d as usize)
        };

        for kr in 0..kept_dim {
            for kc in 0..kept_dim {
                let mut sum = 0.0;
                for t in 0..traced_dim {
                    sum += self.mat[(compose(kr, t), compose(kc, t))];
                }
                out[(kr, kc)] = sum;
            }
        }
        let sites = keep_positions.iter().map(|&p| self.sites[p]).collect();
        DensityMatrix::new(sites, out)
    }

    /// Plain-text dump: header `sites=<list> dim=<d>`, then the matrix
    /// row-major with 17 significant digits.
    pub fn to_text(&self) -> String {
        let site_list = self
            .sites
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let mut out = format!("sites={} dim={}\n", site_list, self.dim());
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| format!("{:.16e}", self.mat[(i, j)]))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<DensityMatrix> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| LadderError::FormViolation("empty dump".into()))?;
        let bad = |m: &str| LadderError::FormViolation(format!("bad dump header: {m}"));
        let mut sites = Vec::new();
        let mut dim = 0usize;
        for tok in header.split_whitespace() {
            if let Some(list) = tok.strip_prefix("sites=") {
                for s in list.split(',') {
                    sites.push(s.parse::<usize>().map_err(|_| bad(tok))?);
                }
            } else if let Some(d) = tok.strip_prefix("dim=") {
                dim = d.parse::<usize>().map_err(|_| bad(tok))?;
            }
        }
        if dim == 0 || dim != 3usize.pow(sites.len() as u32) {
            return Err(bad("dim does not match site count"));
        }
        let mut mat = DMatrix::zeros(dim, dim);
        for (i, line) in lines.enumerate().take(dim) {
            for (j, tok) in line.split_whitespace().enumerate() {
                if j >= dim {
                    return Err(LadderError::FormViolation("row too long".into()));
                }
                mat[(i, j)] = tok
                    .parse::<f64>()
                    .map_err(|_| LadderError::FormViolation(format!("bad float {tok}")))?;
            }
        }
        Ok(DensityMatrix::new(sites, mat))
    }
}

/// Kept-subset index of `key` under the convention that the first kept site
/// is the most significant trit.
fn split_key(key: u64, n_sites: usize, keep: &[usize], keep_mask: &[bool]) -> (usize, u64) {
    let mut kept = 0usize;
    for &s in keep {
        kept = kept * 3 + digit(key, n_sites, s) as usize;
    }
    let mut rest = 0u64;
    for s in 0..n_sites {
        if !keep_mask[s] {
            rest = rest * 3 + digit(key, n_sites, s) as u64;
        }
    }
    (kept, rest)
}

/// Partial trace over the complement of `keep`, without normalization. The
/// trace of the result equals the squared norm of the state.
pub fn reduce_unnormalized(state: &SparseState, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(LadderError::BadKeepList("empty keep list".into()));
    }
    let n = state.n_sites();
    if keep.iter().any(|&s| s >= n) || keep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LadderError::BadKeepList(format!(
            "keep list {keep:?} must be ascending sites below {n}"
        )));
    }
    let mut keep_mask = vec![false; n];
    for &s in keep {
        keep_mask[s] = true;
    }
    let dim = 3usize.pow(keep.len() as u32);
    // Group amplitudes by the traced-out pattern, then accumulate outer
    // products group by group.
    let mut groups: BTreeMap<u64, Vec<(usize, f64)>> = BTreeMap::new();
    for (&key, &amp) in state.iter() {
        let (kept, rest) = split_key(key, n, keep, &keep_mask);
        groups.entry(rest).or_default().push((kept, amp));
    }
    let mut mat = DMatrix::zeros(dim, dim);
    for group in groups.values() {
        for &(i, a) in group {
            for &(j, b) in group {
                mat[(i, j)] += a * b;
            }
        }
    }
    Ok(DensityMatrix::new(keep.to_vec(), mat))
}

/// Normalized reduced density matrix on `keep` (ascending site indices).
pub fn reduce(state: &SparseState, keep: &[usize]) -> Result<DensityMatrix> {
    let mut rho = reduce_unnormalized(state, keep)?;
    let tr = rho.trace();
    if tr <= PRUNE_EPS {
        return Err(LadderError::ZeroNorm);
    }
    rho.mat /= tr;
    Ok(rho)
}

/// Tr(rho^2); equals 1 iff pure (within tolerance).
pub fn purity(rho: &DensityMatrix) -> f64 {
    let mut p = 0.0;
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            p += rho.mat[(i, j)] * rho.mat[(j, i)];
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rung singlet (|01> - |10>)/sqrt(2) on two sites.
    fn singlet() -> SparseState {
        let mut s = SparseState::new(2);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        s.add_amplitude(key_from_digits(&[0, 1]), r);
        s.add_amplitude(key_from_digits(&[1, 0]), -r);
        s
    }

    #[test]
    fn singlet_is_normalized() {
        let s = singlet();
        assert!((inner(&s, &s).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_basis_strings() {
        let a = SparseState::basis_string(&[2, 2, 2, 2]);
        let b = SparseState::basis_string(&[0, 1, 2, 2]);
        assert_eq!(inner(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn inner_rejects_mismatched_sites() {
        let a = SparseState::basis_string(&[2, 2]);
        let b = SparseState::basis_string(&[2, 2, 2]);
        assert!(inner(&a, &b).is_err());
    }

    #[test]
    fn singlet_marginal_is_maximally_mixed_spin() {
        let rho = reduce(&singlet(), &[0]).unwrap();
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 0.5, 0.0]));
        assert!((&rho.mat - &expected).abs().max() < 1e-15);
    }

    #[test]
    fn product_hole_marginal_is_pure() {
        let s = SparseState::basis_string(&[2, 2]);
        let rho = reduce(&s, &[0]).unwrap();
        assert!((rho.mat[(2, 2)] - 1.0).abs() < 1e-15);
        assert!((purity(&rho) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purity_of_half_half() {
        let mat = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 0.5, 0.0]));
        let rho = DensityMatrix::new(vec![0], mat);
        assert!((purity(&rho) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn full_keep_is_pure_projector() {
        let mut s = SparseState::new(3);
        s.add_amplitude(key_from_digits(&[0, 1, 2]), 2.0);
        s.add_amplitude(key_from_digits(&[2, 1, 0]), 1.0);
        let rho = reduce(&s, &[0, 1, 2]).unwrap();
        assert!((purity(&rho) - 1.0).abs() < 1e-12);
        assert!((rho.lambda_max() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_trace_equals_norm_sqr() {
        let mut s = SparseState::new(4);
        s.add_amplitude(key_from_digits(&[0, 1, 2, 2]), 1.5);
        s.add_amplitude(key_from_digits(&[1, 0, 2, 2]), -0.5);
        s.add_amplitude(key_from_digits(&[2, 2, 0, 1]), 0.25);
        let rho = reduce_unnormalized(&s, &[1, 3]).unwrap();
        assert!((rho.trace() - s.norm_sqr()).abs() < 1e-14);
    }

    #[test]
    fn nested_reduction_matches_direct() {
        let mut s = SparseState::new(4);
        // arbitrary deterministic state
        for (i, key) in [
            [0u8, 1, 2, 0],
            [1, 0, 2, 1],
            [2, 2, 0, 1],
            [0, 0, 1, 1],
            [2, 1, 0, 2],
        ]
        .iter()
        .enumerate()
        {
            s.add_amplitude(key_from_digits(key), 0.3 + 0.2 * i as f64);
        }
        let nested = reduce(&s, &[0, 1, 3]).unwrap().partial_trace(&[0, 2]);
        let direct = reduce(&s, &[0, 3]).unwrap();
        assert_eq!(nested.sites, direct.sites);
        assert!((&nested.mat - &direct.mat).abs().max() < 1e-12);
    }

    #[test]
    fn eigenvalues_sum_to_one() {
        let mut s = SparseState::new(4);
        s.add_amplitude(key_from_digits(&[0, 1, 1, 0]), 1.0);
        s.add_amplitude(key_from_digits(&[1, 0, 0, 1]), 0.7);
        s.add_amplitude(key_from_digits(&[2, 2, 2, 2]), 0.3);
        let rho = reduce(&s, &[0, 2]).unwrap();
        let sum: f64 = rho.eigenvalues().iter().sum();
        assert!((sum - 1.0).abs() < 1e-10);
    }

    #[test]
    fn text_round_trip() {
        let s = singlet();
        let rho = reduce(&s, &[0, 1]).unwrap();
        let text = rho.to_text();
        assert!(text.starts_with("sites=0,1 dim=9\n"));
        let back = DensityMatrix::from_text(&text).unwrap();
        assert_eq!(back.sites, rho.sites);
        assert!((&back.mat - &rho.mat).abs().max() < 1e-15);
    }

    #[test]
    fn reduce_rejects_bad_input() {
        let s = singlet();
        assert!(reduce(&s, &[]).is_err());
        assert!(reduce(&s, &[0, 0]).is_err());
        assert!(reduce(&s, &[5]).is_err());
        let z = SparseState::new(2);
        assert!(reduce(&z, &[0]).is_err());
    }
}
