//! Matrix product states over spin-1/2 sites.
//!
//! A state on n sites is held as n rank-3 tensors, site i shaped
//! (m_i, 2, m_{i+1}) with m_0 = m_n = 1, physical basis index 0 = ↑, 1 = ↓.
//! Tensors are real: every Hamiltonian handled here is real symmetric in the
//! Z product basis, so ground states can be chosen real and overlap phases
//! reduce to signs.
//!
//! Mixed canonical form: when `center = Some(c)`, tensors left of c are left
//! isometries, tensors right of c are right isometries, and the center
//! carries the norm (kept at 1). The Schmidt spectrum across bond k is then
//! readable from one SVD of the tensor at site k−1. Canonical moves, bond
//! truncation, overlaps, Z readout, and dense import/export all live here.

use ndarray::{s, Array1, Array2, Array3, Axis};

use crate::contract::{mat, overlap_step};
use crate::error::{Error, Result};
use crate::instance::SpinConfiguration;
use crate::linalg::{split_truncate, svd_econ};
use crate::spectrum::EntanglementSpectrum;

/// Relative singular-value cutoff for rank trimming during dense import.
const IMPORT_RANK_CUTOFF: f64 = 1e-14;

/// Expectation magnitudes below this count as a tie in Z readout.
const READOUT_TIE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Mps {
    pub(crate) tensors: Vec<Array3<f64>>,
    pub(crate) center: Option<usize>,
}

/// Per-bond record of what a truncation pass removed.
#[derive(Debug, Clone)]
pub struct TruncationReport {
    /// Discarded probability mass at bonds 1..n−1 (index k−1 for bond k).
    pub discarded: Vec<f64>,
    /// Whether the dimension cap, not the tolerance, set the cut at a bond.
    pub cap_bound: Vec<bool>,
}

impl TruncationReport {
    pub fn any_cap_bound(&self) -> bool {
        self.cap_bound.iter().any(|&b| b)
    }

    pub fn max_discarded(&self) -> f64 {
        self.discarded.iter().copied().fold(0.0, f64::max)
    }
}

fn mat2(v: ndarray::ArrayView3<f64>, rows: usize, cols: usize) -> Array2<f64> {
    let data: Vec<f64> = v.iter().copied().collect();
    Array2::from_shape_vec((rows, cols), data).expect("element count preserved")
}

fn ten3(m: Array2<f64>, d: (usize, usize, usize)) -> Array3<f64> {
    m.into_shape_with_order(d).expect("element count preserved")
}

/// diag(s) · vt, scaling rows.
fn scale_rows(mut vt: Array2<f64>, s: &Array1<f64>) -> Array2<f64> {
    for (i, mut row) in vt.axis_iter_mut(Axis(0)).enumerate() {
        row *= s[i];
    }
    vt
}

/// u · diag(s), scaling columns.
fn scale_cols(mut u: Array2<f64>, s: &Array1<f64>) -> Array2<f64> {
    for (i, mut col) in u.axis_iter_mut(Axis(1)).enumerate() {
        col *= s[i];
    }
    u
}

impl Mps {
    /// Wraps raw tensors, checking the shape chain and boundary bonds.
    pub fn new(tensors: Vec<Array3<f64>>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::InvalidSize("state needs at least one site".into()));
        }
        let mut left = 1;
        for (i, t) in tensors.iter().enumerate() {
            let (l, p, r) = t.dim();
            if p != 2 {
                return Err(Error::DimensionMismatch(format!(
                    "site {i} has physical dimension {p}, expected 2"
                )));
            }
            if l != left {
                return Err(Error::DimensionMismatch(format!(
                    "site {i} left bond {l} does not chain with previous right bond {left}"
                )));
            }
            left = r;
        }
        if left != 1 {
            return Err(Error::DimensionMismatch(format!(
                "last site right bond is {left}, expected 1"
            )));
        }
        Ok(Mps {
            tensors,
            center: None,
        })
    }

    pub fn n(&self) -> usize {
        self.tensors.len()
    }

    pub fn center(&self) -> Option<usize> {
        self.center
    }

    /// Bond dimensions m_0..m_n (length n+1, both ends 1).
    pub fn bond_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.n() + 1);
        dims.push(1);
        for t in &self.tensors {
            dims.push(t.dim().2);
        }
        dims
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn tensors(&self) -> &[Array3<f64>] {
        &self.tensors
    }

    /// Product state with every spin along +X: amplitudes (1/√2, 1/√2).
    pub fn product_plus_x(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("state needs at least one site".into()));
        }
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let site = Array3::from_shape_vec((1, 2, 1), vec![amp, amp]).expect("fixed shape");
        Ok(Mps {
            tensors: vec![site; n],
            center: Some(0),
        })
    }

    /// Z-basis product state, +1 = ↑, −1 = ↓.
    pub fn basis_state(spins: &[i8]) -> Result<Self> {
        if spins.is_empty() {
            return Err(Error::InvalidSize("state needs at least one site".into()));
        }
        let tensors = spins
            .iter()
            .map(|&v| match v {
                1 => Ok(Array3::from_shape_vec((1, 2, 1), vec![1.0, 0.0]).expect("fixed shape")),
                -1 => Ok(Array3::from_shape_vec((1, 2, 1), vec![0.0, 1.0]).expect("fixed shape")),
                other => Err(Error::InvalidParameter(format!(
                    "spin value {other} is not in {{-1,+1}}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Mps {
            tensors,
            center: Some(0),
        })
    }

    /// Compresses a dense amplitude vector (length 2^n, slot 0 the most
    /// significant bit) into canonical form with center at the last site.
    pub fn from_statevector(amplitudes: &[f64]) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidSize(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n = len.trailing_zeros() as usize;
        let norm = amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Numerical(format!(
                "amplitude vector has norm {norm}"
            )));
        }
        let mut rest =
            Array2::from_shape_vec((1, len), amplitudes.iter().map(|a| a / norm).collect())
                .expect("element count preserved");
        let mut tensors = Vec::with_capacity(n);
        for _ in 0..n - 1 {
            let (m, c) = rest.dim();
            let block = rest
                .into_shape_with_order((m * 2, c / 2))
                .expect("element count preserved");
            let (u, s, vt) = svd_econ(block)?;
            let keep = s
                .iter()
                .take_while(|&&x| x > s[0] * IMPORT_RANK_CUTOFF)
                .count()
                .max(1);
            let u = u.slice(s![.., ..keep]).to_owned();
            let sv = s.slice(s![..keep]).to_owned();
            let vt = vt.slice(s![..keep, ..]).to_owned();
            tensors.push(ten3(u, (m, 2, keep)));
            rest = scale_rows(vt, &sv);
        }
        let (m, _) = rest.dim();
        tensors.push(ten3(rest, (m, 2, 1)));
        let mut psi = Mps {
            tensors,
            center: Some(n - 1),
        };
        psi.renormalize_center();
        Ok(psi)
    }

    /// Expands to a dense amplitude vector; refuses above 24 sites.
    pub fn to_statevector(&self) -> Result<Vec<f64>> {
        let n = self.n();
        if n > 24 {
            return Err(Error::Capacity(format!(
                "dense expansion of {n} sites would need 2^{n} amplitudes"
            )));
        }
        let mut acc = Array2::from_elem((1, 1), 1.0);
        for t in &self.tensors {
            let (l, _, r) = t.dim();
            let rows = acc.dim().0;
            let grown = acc.dot(&mat2(t.view(), l, 2 * r));
            acc = grown
                .into_shape_with_order((rows * 2, r))
                .expect("element count preserved");
        }
        Ok(acc.column(0).to_vec())
    }

    /// Frobenius norm of the whole state.
    pub fn norm(&self) -> f64 {
        let mut e = Array2::from_elem((1, 1), 1.0);
        for t in &self.tensors {
            e = overlap_step(t, e.view(), t);
        }
        e[[0, 0]].max(0.0).sqrt()
    }

    pub(crate) fn renormalize_center(&mut self) {
        let c = self.center.expect("center set before renormalization");
        let norm = self.tensors[c].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            self.tensors[c].mapv_inplace(|x| x / norm);
        }
    }

    /// Left-orthogonalizes site i, absorbing the remainder into site i+1.
    fn push_right(&mut self, i: usize) -> Result<()> {
        let (l, _, r) = self.tensors[i].dim();
        let block = mat2(self.tensors[i].view(), l * 2, r);
        let (u, s, vt) = svd_econ(block)?;
        let k = s.len();
        self.tensors[i] = ten3(u, (l, 2, k));
        let carry = scale_rows(vt, &s);
        let (_, _, r2) = self.tensors[i + 1].dim();
        let next = carry.dot(&mat2(self.tensors[i + 1].view(), r, 2 * r2));
        self.tensors[i + 1] = ten3(next, (k, 2, r2));
        Ok(())
    }

    /// Right-orthogonalizes site i, absorbing the remainder into site i−1.
    fn push_left(&mut self, i: usize) -> Result<()> {
        let (l, _, r) = self.tensors[i].dim();
        let block = mat2(self.tensors[i].view(), l, 2 * r);
        let (u, s, vt) = svd_econ(block)?;
        let k = s.len();
        self.tensors[i] = ten3(vt, (k, 2, r));
        let carry = scale_cols(u, &s);
        let (l2, _, _) = self.tensors[i - 1].dim();
        let prev = mat2(self.tensors[i - 1].view(), l2 * 2, l).dot(&carry);
        self.tensors[i - 1] = ten3(prev, (l2, 2, k));
        Ok(())
    }

    /// Brings the state to mixed canonical form with the given center and
    /// unit norm.
    pub fn canonicalize(&mut self, center: usize) -> Result<()> {
        let n = self.n();
        if center >= n {
            return Err(Error::IndexOutOfRange(format!(
                "center {center} out of range for {n} sites"
            )));
        }
        for i in 0..center {
            self.push_right(i)?;
        }
        for i in (center + 1..n).rev() {
            self.push_left(i)?;
        }
        self.center = Some(center);
        self.renormalize_center();
        Ok(())
    }

    /// Moves the canonical center, canonicalizing first if there is none.
    pub fn move_center(&mut self, to: usize) -> Result<()> {
        if to >= self.n() {
            return Err(Error::IndexOutOfRange(format!(
                "center {to} out of range for {} sites",
                self.n()
            )));
        }
        let mut c = match self.center {
            Some(c) => c,
            None => return self.canonicalize(to),
        };
        while c < to {
            self.push_right(c)?;
            c += 1;
        }
        while c > to {
            self.push_left(c)?;
            c -= 1;
        }
        self.center = Some(c);
        self.renormalize_center();
        Ok(())
    }

    /// |⟨a|b⟩| by transfer contraction; no canonical form required.
    pub fn overlap(&self, other: &Mps) -> Result<f64> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch(format!(
                "overlap of {} sites with {} sites",
                self.n(),
                other.n()
            )));
        }
        let mut e = Array2::from_elem((1, 1), 1.0);
        for (a, b) in self.tensors.iter().zip(&other.tensors) {
            e = overlap_step(a, e.view(), b);
        }
        Ok(e[[0, 0]].abs())
    }

    /// Schmidt spectrum across bond `cut` (1..n−1), moving the canonical
    /// center next to the bond first.
    pub fn entanglement_spectrum(&mut self, cut: usize) -> Result<EntanglementSpectrum> {
        let n = self.n();
        if cut == 0 || cut >= n {
            return Err(Error::IndexOutOfRange(format!(
                "cut {cut} out of range 1..{n}"
            )));
        }
        self.move_center(cut - 1)?;
        let (l, _, r) = self.tensors[cut - 1].dim();
        let block = mat2(self.tensors[cut - 1].view(), l * 2, r);
        let (_, s, _) = svd_econ(block)?;
        EntanglementSpectrum::new(s.iter().map(|x| x * x).collect(), cut)
    }

    /// Spectra at every interior bond, sweeping the center once.
    pub fn all_cut_spectra(&mut self) -> Result<Vec<EntanglementSpectrum>> {
        let n = self.n();
        let mut out = Vec::with_capacity(n.saturating_sub(1));
        for cut in 1..n {
            out.push(self.entanglement_spectrum(cut)?);
        }
        Ok(out)
    }

    /// Returns a copy compressed bond by bond: at each bond the smallest
    /// head of the Schmidt spectrum whose discarded tail is strictly below
    /// epsilon is kept, capped at m_max. The copy is renormalized.
    pub fn truncate(&self, epsilon: f64, m_max: usize) -> Result<(Mps, TruncationReport)> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "truncation tolerance must be positive, got {epsilon}"
            )));
        }
        if m_max == 0 {
            return Err(Error::InvalidParameter("bond cap must be at least 1".into()));
        }
        let n = self.n();
        let mut psi = self.clone();
        psi.canonicalize(n - 1)?;
        let mut discarded = vec![0.0; n.saturating_sub(1)];
        let mut cap_bound = vec![false; n.saturating_sub(1)];
        // Right-to-left pass: truncate bond i between sites i−1 and i.
        for i in (1..n).rev() {
            let (l, _, r) = psi.tensors[i].dim();
            let block = mat2(psi.tensors[i].view(), l, 2 * r);
            let out = split_truncate(block, epsilon, m_max)?;
            let k = out.singulars.len();
            psi.tensors[i] = ten3(out.right, (k, 2, r));
            let carry = scale_cols(out.left, &Array1::from_vec(out.singulars));
            let (l2, _, _) = psi.tensors[i - 1].dim();
            let prev = mat2(psi.tensors[i - 1].view(), l2 * 2, l).dot(&carry);
            psi.tensors[i - 1] = ten3(prev, (l2, 2, k));
            discarded[i - 1] = out.discarded_weight;
            cap_bound[i - 1] = out.cap_bound;
        }
        psi.center = Some(0);
        psi.renormalize_center();
        Ok((
            psi,
            TruncationReport {
                discarded,
                cap_bound,
            },
        ))
    }

    /// Sign pattern of ⟨S^z_i⟩; magnitudes below 1e−12 read as +1.
    pub fn readout_z(&self) -> Result<SpinConfiguration> {
        let n = self.n();
        // Right transfer environments: rights[i] covers sites i..n.
        let mut rights = vec![Array2::from_elem((1, 1), 1.0); n + 1];
        for i in (0..n).rev() {
            // Mirror contraction: reuse the left step on reversed tensors.
            let t = &self.tensors[i];
            let rev: Vec<f64> = t.view().permuted_axes([2, 1, 0]).iter().copied().collect();
            let (l, _, r) = t.dim();
            let rev = Array3::from_shape_vec((r, 2, l), rev).expect("element count preserved");
            rights[i] = overlap_step(&rev, rights[i + 1].view(), &rev);
        }
        let total = rights[0][[0, 0]];
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Numerical(format!(
                "state has squared norm {total}"
            )));
        }
        let mut left = Array2::from_elem((1, 1), 1.0);
        let mut values = Vec::with_capacity(n);
        for (i, t) in self.tensors.iter().enumerate() {
            let up = t.index_axis(Axis(1), 0);
            let down = t.index_axis(Axis(1), 1);
            // M = 0.5·(A_up^T E A_up − A_down^T E A_down), then close with
            // the right environment.
            let m_up = up.t().dot(&left).dot(&up);
            let m_down = down.t().dot(&left).dot(&down);
            let m = 0.5 * (&m_up - &m_down);
            let val = (&m * &rights[i + 1].view().t()).sum() / total;
            values.push(if val.abs() < READOUT_TIE {
                1
            } else if val > 0.0 {
                1
            } else {
                -1
            });
            left = overlap_step(t, left.view(), t);
        }
        SpinConfiguration::new(values)
    }

    /// Projective z-basis readout: walks the chain measuring each site to
    /// its likelier outcome conditioned on the outcomes before it, ties
    /// (probability gap below 1e−12) to +1. Unlike the marginal signs of
    /// [`Mps::readout_z`], a degenerate superposition of two sign patterns
    /// resolves to one of the patterns instead of averaging to zero.
    pub fn collapse_z(&self) -> Result<SpinConfiguration> {
        let mut work = self.clone();
        work.move_center(0)?;
        let n = work.n();
        let mut values = Vec::with_capacity(n);
        // With the tail right-isometric, the current (1,2,r) tensor holds
        // the conditional outcome amplitudes for this site.
        let mut cur = work.tensors[0].clone();
        for i in 0..n {
            let up = cur.index_axis(Axis(1), 0);
            let down = cur.index_axis(Axis(1), 1);
            let p_up: f64 = up.iter().map(|x| x * x).sum();
            let p_down: f64 = down.iter().map(|x| x * x).sum();
            let gap = 0.5 * (p_up - p_down) / (p_up + p_down);
            let chosen = if gap < -READOUT_TIE { 1 } else { 0 };
            values.push(if chosen == 0 { 1 } else { -1 });
            let weight = if chosen == 0 { p_up } else { p_down };
            if !(weight > 0.0) || !weight.is_finite() {
                return Err(Error::Numerical(format!(
                    "collapse at site {i} left weight {weight}"
                )));
            }
            if i + 1 == n {
                break;
            }
            let branch = cur.index_axis(Axis(1), chosen).to_owned() / weight.sqrt();
            let next = &work.tensors[i + 1];
            let (_, _, r2) = next.dim();
            let merged = branch.dot(&mat(next.view(), next.dim().0, 2 * r2));
            cur = merged
                .into_shape_with_order((1, 2, r2))
                .expect("element count preserved");
        }
        SpinConfiguration::new(values)
    }

    /// Debug dump: nested arrays per site tensor. Not a stable format.
    pub fn dump_json(&self) -> String {
        let tensors: Vec<Vec<Vec<Vec<f64>>>> = self
            .tensors
            .iter()
            .map(|t| {
                let (l, _, r) = t.dim();
                (0..l)
                    .map(|a| {
                        (0..2)
                            .map(|p| (0..r).map(|b| t[[a, p, b]]).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let doc = serde_json::json!({
            "n": self.n(),
            "center": self.center,
            "tensors": tensors,
        });
        serde_json::to_string(&doc).expect("state serialization")
    }
}
