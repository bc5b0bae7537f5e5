//! Sparse truncated Fock-space engine for a fixed set of dual-rail
//! polarization modes.
//!
//! States are maps from occupation-number basis kets to complex amplitudes.
//! Linear-optical elements act by creation-operator substitution: each input
//! operator is replaced by the matrix-weighted combination of output
//! operators, with the square-root factorial bookkeeping handled explicitly.
//! Occupation caps are enforced on every creation; exceeding them is a hard
//! error, not a silent truncation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Amplitudes below this modulus are dropped after every linear operation.
pub const PRUNE_EPS: f64 = 1e-15;

const UNITARITY_EPS: f64 = 1e-12;

/// Spatial rails of the experiment. Declaration order is the canonical
/// ordering used by every basis ket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpatialMode {
    Control,
    Herald,
    Input1,
    Input2,
    Mixed1,
    Mixed2,
    Clone1,
    Clone2,
}

impl SpatialMode {
    pub const ALL: [SpatialMode; 8] = [
        SpatialMode::Control,
        SpatialMode::Herald,
        SpatialMode::Input1,
        SpatialMode::Input2,
        SpatialMode::Mixed1,
        SpatialMode::Mixed2,
        SpatialMode::Clone1,
        SpatialMode::Clone2,
    ];

    pub fn h(self) -> ModeLabel {
        ModeLabel { spatial: self, pol: Polarization::H }
    }

    pub fn v(self) -> ModeLabel {
        ModeLabel { spatial: self, pol: Polarization::V }
    }
}

impl fmt::Display for SpatialMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SpatialMode::Control => "0",
            SpatialMode::Herald => "0'",
            SpatialMode::Input1 => "1",
            SpatialMode::Input2 => "2",
            SpatialMode::Mixed1 => "1'",
            SpatialMode::Mixed2 => "2'",
            SpatialMode::Clone1 => "1''",
            SpatialMode::Clone2 => "2''",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::H => "H",
            Polarization::V => "V",
        })
    }
}

/// One polarization rail of one spatial mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    pub spatial: SpatialMode,
    pub pol: Polarization,
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.spatial, self.pol)
    }
}

/// Truncation limits. Both are enforced on every creation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub per_mode: u8,
    pub total: u8,
}

impl Caps {
    pub fn new(per_mode: u8, total: u8) -> Self {
        Caps { per_mode, total }
    }
}

impl Default for Caps {
    fn default() -> Self {
        Caps { per_mode: 2, total: 6 }
    }
}

/// Occupation-number basis ket: sorted (label, n) pairs, zeros omitted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FockBasisState {
    occ: Vec<(ModeLabel, u8)>,
}

impl FockBasisState {
    pub fn vacuum() -> Self {
        FockBasisState { occ: Vec::new() }
    }

    pub fn from_occupations<I: IntoIterator<Item = (ModeLabel, u8)>>(pairs: I) -> Self {
        let mut map: BTreeMap<ModeLabel, u8> = BTreeMap::new();
        for (label, n) in pairs {
            if n > 0 {
                *map.entry(label).or_insert(0) += n;
            }
        }
        FockBasisState { occ: map.into_iter().collect() }
    }

    pub fn occupation(&self, label: ModeLabel) -> u8 {
        match self.occ.binary_search_by_key(&label, |&(l, _)| l) {
            Ok(i) => self.occ[i].1,
            Err(_) => 0,
        }
    }

    pub fn total_photons(&self) -> u32 {
        self.occ.iter().map(|&(_, n)| n as u32).sum()
    }

    /// Photons in both polarization rails of one spatial mode.
    pub fn spatial_total(&self, spatial: SpatialMode) -> u32 {
        self.occ
            .iter()
            .filter(|&&(l, _)| l.spatial == spatial)
            .map(|&(_, n)| n as u32)
            .sum()
    }

    pub fn occupations(&self) -> impl Iterator<Item = (ModeLabel, u8)> + '_ {
        self.occ.iter().copied()
    }

    /// Same ket with one more photon in `label`; also returns the new count.
    pub fn with_increment(&self, label: ModeLabel) -> (Self, u8) {
        let mut occ = self.occ.clone();
        match occ.binary_search_by_key(&label, |&(l, _)| l) {
            Ok(i) => {
                occ[i].1 += 1;
                let n = occ[i].1;
                (FockBasisState { occ }, n)
            }
            Err(i) => {
                occ.insert(i, (label, 1));
                (FockBasisState { occ }, 1)
            }
        }
    }

    /// Ket restricted to the given spatial modes.
    pub fn restricted_to(&self, keep: &[SpatialMode]) -> Self {
        FockBasisState {
            occ: self
                .occ
                .iter()
                .filter(|&&(l, _)| keep.contains(&l.spatial))
                .copied()
                .collect(),
        }
    }

    /// Splits into (kept, rest) by spatial mode.
    pub fn split_by_spatial(&self, keep: &[SpatialMode]) -> (Self, Self) {
        let mut kept = Vec::new();
        let mut rest = Vec::new();
        for &(l, n) in &self.occ {
            if keep.contains(&l.spatial) {
                kept.push((l, n));
            } else {
                rest.push((l, n));
            }
        }
        (FockBasisState { occ: kept }, FockBasisState { occ: rest })
    }

    fn without_labels(&self, drop: &[ModeLabel]) -> Self {
        FockBasisState {
            occ: self
                .occ
                .iter()
                .filter(|&&(l, _)| !drop.contains(&l))
                .copied()
                .collect(),
        }
    }

    /// Applies a spatial-mode renaming. Two occupied modes must not map to
    /// the same target.
    pub fn relabeled(&self, map: impl Fn(SpatialMode) -> SpatialMode) -> Result<Self> {
        let mut out: BTreeMap<ModeLabel, u8> = BTreeMap::new();
        for &(l, n) in &self.occ {
            let new_label = ModeLabel { spatial: map(l.spatial), pol: l.pol };
            if out.insert(new_label, n).is_some() {
                return Err(Error::ModeCollision { mode: new_label.to_string() });
            }
        }
        Ok(FockBasisState { occ: out.into_iter().collect() })
    }

    fn satisfies(&self, caps: Caps) -> bool {
        self.occ.iter().all(|&(_, n)| n <= caps.per_mode)
            && self.total_photons() <= caps.total as u32
    }
}

impl fmt::Display for FockBasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.occ.is_empty() {
            return f.write_str("|vac>");
        }
        f.write_str("|")?;
        for (i, (l, n)) in self.occ.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{n}{l}")?;
        }
        f.write_str(">")
    }
}

fn factorial(n: u8) -> f64 {
    (1..=n as u64).product::<u64>() as f64
}

/// Linear mode map: input creation operator `i` becomes
/// `sum_j matrix[j][i] * (output creation operator j)`.
#[derive(Debug, Clone)]
pub struct ModeTransform {
    inputs: Vec<ModeLabel>,
    outputs: Vec<ModeLabel>,
    matrix: Vec<Vec<Complex64>>,
}

impl ModeTransform {
    /// Checks squareness, distinct labels and column orthonormality.
    pub fn new(
        inputs: Vec<ModeLabel>,
        outputs: Vec<ModeLabel>,
        matrix: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        let n = inputs.len();
        assert_eq!(outputs.len(), n, "mode transform must be square");
        assert_eq!(matrix.len(), n, "matrix rows must match output count");
        assert!(matrix.iter().all(|row| row.len() == n), "matrix must be square");
        for (set, name) in [(&inputs, "input"), (&outputs, "output")] {
            let distinct: BTreeSet<_> = set.iter().collect();
            if distinct.len() != n {
                return Err(Error::ModeCollision {
                    mode: format!("duplicate {name} label in mode transform"),
                });
            }
        }
        let mut deviation: f64 = 0.0;
        for i in 0..n {
            for k in 0..n {
                let dot: Complex64 =
                    (0..n).map(|j| matrix[j][i].conj() * matrix[j][k]).sum();
                let expect = if i == k { 1.0 } else { 0.0 };
                deviation = deviation.max((dot - expect).norm());
            }
        }
        if deviation > UNITARITY_EPS {
            return Err(Error::NonUnitaryTransform { deviation });
        }
        Ok(ModeTransform { inputs, outputs, matrix })
    }

    pub fn inputs(&self) -> &[ModeLabel] {
        &self.inputs
    }

    fn apply_to_ket(
        &self,
        ket: &FockBasisState,
        amp: Complex64,
        caps: Caps,
    ) -> Result<BTreeMap<FockBasisState, Complex64>> {
        let occs: Vec<u8> = self.inputs.iter().map(|&l| ket.occupation(l)).collect();
        let bystander = ket.without_labels(&self.inputs);
        for &o in &self.outputs {
            if !self.inputs.contains(&o) && bystander.occupation(o) > 0 {
                return Err(Error::ModeCollision { mode: o.to_string() });
            }
        }
        let norm: f64 = occs.iter().map(|&n| factorial(n)).product();
        let mut work: BTreeMap<FockBasisState, Complex64> = BTreeMap::new();
        work.insert(bystander, amp / norm.sqrt());
        for (i, &n_i) in occs.iter().enumerate() {
            for _ in 0..n_i {
                let mut next: BTreeMap<FockBasisState, Complex64> = BTreeMap::new();
                for (k, a) in &work {
                    for (j, &out) in self.outputs.iter().enumerate() {
                        let c = self.matrix[j][i];
                        if c.norm_sqr() < 1e-32 {
                            continue;
                        }
                        let (k2, new_n) = k.with_increment(out);
                        if new_n > caps.per_mode {
                            return Err(Error::TruncationOverflow {
                                scope: out.to_string(),
                                occupancy: new_n as u32,
                                cap: caps.per_mode as u32,
                            });
                        }
                        let total = k2.total_photons();
                        if total > caps.total as u32 {
                            return Err(Error::TruncationOverflow {
                                scope: "total".to_string(),
                                occupancy: total,
                                cap: caps.total as u32,
                            });
                        }
                        *next.entry(k2).or_insert(Complex64::new(0.0, 0.0)) +=
                            a * c * (new_n as f64).sqrt();
                    }
                }
                next.retain(|_, v| v.norm() >= PRUNE_EPS);
                work = next;
            }
        }
        Ok(work)
    }
}

/// Pure state: sparse amplitude map plus the caps it was built under.
#[derive(Debug, Clone)]
pub struct PureState {
    amps: BTreeMap<FockBasisState, Complex64>,
    caps: Caps,
}

impl PureState {
    pub fn vacuum(caps: Caps) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(FockBasisState::vacuum(), Complex64::new(1.0, 0.0));
        PureState { amps, caps }
    }

    pub fn empty(caps: Caps) -> Self {
        PureState { amps: BTreeMap::new(), caps }
    }

    pub fn from_amplitudes<I>(iter: I, caps: Caps) -> Result<Self>
    where
        I: IntoIterator<Item = (FockBasisState, Complex64)>,
    {
        let mut amps = BTreeMap::new();
        for (ket, amp) in iter {
            if !ket.satisfies(caps) {
                return Err(Error::TruncationOverflow {
                    scope: ket.to_string(),
                    occupancy: ket.total_photons(),
                    cap: caps.total as u32,
                });
            }
            if amp.norm() >= PRUNE_EPS {
                *amps.entry(ket).or_insert(Complex64::new(0.0, 0.0)) += amp;
            }
        }
        Ok(PureState { amps, caps })
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = (&FockBasisState, Complex64)> + '_ {
        self.amps.iter().map(|(k, &v)| (k, v))
    }

    pub fn amplitude(&self, ket: &FockBasisState) -> Complex64 {
        self.amps.get(ket).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// Applies the creation operator for `label`, including the sqrt(n+1)
    /// factor.
    pub fn create(&self, label: ModeLabel) -> Result<Self> {
        let mut amps = BTreeMap::new();
        for (ket, &amp) in &self.amps {
            let (new_ket, new_n) = ket.with_increment(label);
            if new_n > self.caps.per_mode {
                return Err(Error::TruncationOverflow {
                    scope: label.to_string(),
                    occupancy: new_n as u32,
                    cap: self.caps.per_mode as u32,
                });
            }
            let total = new_ket.total_photons();
            if total > self.caps.total as u32 {
                return Err(Error::TruncationOverflow {
                    scope: "total".to_string(),
                    occupancy: total,
                    cap: self.caps.total as u32,
                });
            }
            amps.insert(new_ket, amp * (new_n as f64).sqrt());
        }
        Ok(PureState { amps, caps: self.caps })
    }

    pub fn apply_mode_transform(&self, t: &ModeTransform) -> Result<Self> {
        let mut out: BTreeMap<FockBasisState, Complex64> = BTreeMap::new();
        for (ket, &amp) in &self.amps {
            for (k, v) in t.apply_to_ket(ket, amp, self.caps)? {
                *out.entry(k).or_insert(Complex64::new(0.0, 0.0)) += v;
            }
        }
        out.retain(|_, v| v.norm() >= PRUNE_EPS);
        Ok(PureState { amps: out, caps: self.caps })
    }

    pub fn plus(&self, other: &PureState) -> Result<Self> {
        if self.caps != other.caps {
            return Err(Error::CapsMismatch);
        }
        let mut amps = self.amps.clone();
        for (ket, &amp) in &other.amps {
            *amps.entry(ket.clone()).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        amps.retain(|_, v| v.norm() >= PRUNE_EPS);
        Ok(PureState { amps, caps: self.caps })
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let amps = self
            .amps
            .iter()
            .map(|(k, &v)| (k.clone(), v * factor))
            .filter(|(_, v)| v.norm() >= PRUNE_EPS)
            .collect();
        PureState { amps, caps: self.caps }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|v| v.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(1.0 / n2.sqrt(), 0.0)))
    }

    /// `<self|other>`.
    pub fn inner_product(&self, other: &PureState) -> Complex64 {
        let (small, large, conj_small) = if self.amps.len() <= other.amps.len() {
            (&self.amps, &other.amps, true)
        } else {
            (&other.amps, &self.amps, false)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (ket, &a) in small {
            if let Some(&b) = large.get(ket) {
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        acc
    }

    pub fn prune(&mut self, eps: f64) {
        self.amps.retain(|_, v| v.norm() >= eps);
    }

    pub fn to_density(&self) -> DensityOperator {
        let mut d = DensityOperator::empty(self.caps);
        d.add_pure_scaled(self, 1.0);
        d
    }

    pub fn relabeled(&self, map: impl Fn(SpatialMode) -> SpatialMode + Copy) -> Result<Self> {
        let mut amps = BTreeMap::new();
        for (ket, &amp) in &self.amps {
            let new_ket = ket.relabeled(map)?;
            if amps.insert(new_ket, amp).is_some() {
                return Err(Error::ModeCollision { mode: "relabel merged kets".to_string() });
            }
        }
        Ok(PureState { amps, caps: self.caps })
    }
}

/// Multiplicative diagonal operator, defined by a per-ket complex factor.
pub struct DiagonalOperator {
    f: Box<dyn Fn(&FockBasisState) -> Complex64 + Send + Sync>,
}

impl DiagonalOperator {
    pub fn new(f: impl Fn(&FockBasisState) -> Complex64 + Send + Sync + 'static) -> Self {
        DiagonalOperator { f: Box::new(f) }
    }

    pub fn factor(&self, ket: &FockBasisState) -> Complex64 {
        (self.f)(ket)
    }

    pub fn apply_to_state(&self, state: &PureState) -> PureState {
        let amps = state
            .amps
            .iter()
            .map(|(k, &v)| (k.clone(), v * (self.f)(k)))
            .filter(|(_, v)| v.norm() >= PRUNE_EPS)
            .collect();
        PureState { amps, caps: state.caps }
    }
}

/// General sparse operator `sum |row> value <col|`.
#[derive(Debug, Clone, Default)]
pub struct SparseOperator {
    entries: BTreeMap<(FockBasisState, FockBasisState), Complex64>,
}

impl SparseOperator {
    pub fn new() -> Self {
        SparseOperator::default()
    }

    pub fn add_entry(&mut self, row: FockBasisState, col: FockBasisState, value: Complex64) {
        *self
            .entries
            .entry((row, col))
            .or_insert(Complex64::new(0.0, 0.0)) += value;
    }

    fn column_index(&self) -> HashMap<&FockBasisState, Vec<(&FockBasisState, Complex64)>> {
        let mut cols: HashMap<&FockBasisState, Vec<(&FockBasisState, Complex64)>> =
            HashMap::new();
        for ((row, col), &v) in &self.entries {
            cols.entry(col).or_default().push((row, v));
        }
        cols
    }
}

/// Sparse density operator over the same basis.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    entries: BTreeMap<(FockBasisState, FockBasisState), Complex64>,
    caps: Caps,
}

impl DensityOperator {
    pub fn empty(caps: Caps) -> Self {
        DensityOperator { entries: BTreeMap::new(), caps }
    }

    pub fn from_pure(state: &PureState) -> Self {
        state.to_density()
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    /// Adds `weight * |state><state|`.
    pub fn add_pure_scaled(&mut self, state: &PureState, weight: f64) {
        if weight == 0.0 {
            return;
        }
        for (a, &va) in &state.amps {
            for (b, &vb) in &state.amps {
                let v = va * vb.conj() * weight;
                if v.norm() < 1e-300 {
                    continue;
                }
                *self
                    .entries
                    .entry((a.clone(), b.clone()))
                    .or_insert(Complex64::new(0.0, 0.0)) += v;
            }
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&FockBasisState, &FockBasisState, Complex64)> {
        self.entries.iter().map(|((a, b), &v)| (a, b, v))
    }

    pub fn diagonal(&self) -> impl Iterator<Item = (&FockBasisState, f64)> {
        self.entries
            .iter()
            .filter(|((a, b), _)| a == b)
            .map(|((a, _), &v)| (a, v.re))
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().map(|(_, v)| v).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        DensityOperator {
            entries: self
                .entries
                .iter()
                .map(|(k, &v)| (k.clone(), v * factor))
                .collect(),
            caps: self.caps,
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t.abs() < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(1.0 / t))
    }

    pub fn max_hermiticity_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for ((a, b), &v) in &self.entries {
            let mirror = self
                .entries
                .get(&(b.clone(), a.clone()))
                .copied()
                .unwrap_or(Complex64::new(0.0, 0.0));
            worst = worst.max((v - mirror.conj()).norm());
        }
        worst
    }

    pub fn is_hermitian_within(&self, tol: f64) -> bool {
        self.max_hermiticity_violation() <= tol
    }

    /// Traces out every spatial mode not in `keep`. Off-diagonal elements
    /// survive only when the traced-out parts of ket and bra agree.
    pub fn partial_trace(&self, keep: &[SpatialMode]) -> Self {
        let mut out: BTreeMap<(FockBasisState, FockBasisState), Complex64> = BTreeMap::new();
        for ((a, b), &v) in &self.entries {
            let (a_keep, a_rest) = a.split_by_spatial(keep);
            let (b_keep, b_rest) = b.split_by_spatial(keep);
            if a_rest != b_rest {
                continue;
            }
            *out.entry((a_keep, b_keep)).or_insert(Complex64::new(0.0, 0.0)) += v;
        }
        out.retain(|_, v| v.norm() >= 1e-300);
        DensityOperator { entries: out, caps: self.caps }
    }

    /// `D rho D^dagger` for a diagonal `D`.
    pub fn apply_diagonal(&self, op: &DiagonalOperator) -> Self {
        let mut out = BTreeMap::new();
        for ((a, b), &v) in &self.entries {
            let w = v * op.factor(a) * op.factor(b).conj();
            if w.norm() >= 1e-300 {
                out.insert((a.clone(), b.clone()), w);
            }
        }
        DensityOperator { entries: out, caps: self.caps }
    }

    /// `O rho O^dagger` for a general sparse `O`.
    pub fn apply_operator_sandwich(&self, op: &SparseOperator) -> Self {
        let cols = op.column_index();
        let mut out: BTreeMap<(FockBasisState, FockBasisState), Complex64> = BTreeMap::new();
        for ((a, b), &v) in &self.entries {
            let (Some(left), Some(right)) = (cols.get(a), cols.get(b)) else {
                continue;
            };
            for &(x, oxa) in left {
                for &(y, oyb) in right {
                    let w = oxa * v * oyb.conj();
                    if w.norm() < 1e-300 {
                        continue;
                    }
                    *out.entry((x.clone(), y.clone()))
                        .or_insert(Complex64::new(0.0, 0.0)) += w;
                }
            }
        }
        out.retain(|_, v| v.norm() >= 1e-300);
        DensityOperator { entries: out, caps: self.caps }
    }

    /// `U rho U^dagger` by transforming kets and bras through the mode map.
    pub fn apply_mode_transform(&self, t: &ModeTransform) -> Result<Self> {
        let mut cache: HashMap<&FockBasisState, BTreeMap<FockBasisState, Complex64>> =
            HashMap::new();
        let one = Complex64::new(1.0, 0.0);
        for (a, b) in self.entries.keys() {
            for ket in [a, b] {
                if !cache.contains_key(ket) {
                    cache.insert(ket, t.apply_to_ket(ket, one, self.caps)?);
                }
            }
        }
        let mut out: BTreeMap<(FockBasisState, FockBasisState), Complex64> = BTreeMap::new();
        for ((a, b), &v) in &self.entries {
            let ta = &cache[a];
            let tb = &cache[b];
            for (x, &ax) in ta {
                for (y, &by) in tb {
                    let w = ax * v * by.conj();
                    if w.norm() < 1e-300 {
                        continue;
                    }
                    *out.entry((x.clone(), y.clone()))
                        .or_insert(Complex64::new(0.0, 0.0)) += w;
                }
            }
        }
        out.retain(|_, v| v.norm() >= PRUNE_EPS * PRUNE_EPS);
        Ok(DensityOperator { entries: out, caps: self.caps })
    }

    pub fn expectation_diagonal(&self, f: impl Fn(&FockBasisState) -> f64) -> f64 {
        self.diagonal().map(|(ket, v)| f(ket) * v).sum()
    }

    pub fn relabeled(&self, map: impl Fn(SpatialMode) -> SpatialMode + Copy) -> Result<Self> {
        let mut out = BTreeMap::new();
        for ((a, b), &v) in &self.entries {
            out.insert((a.relabeled(map)?, b.relabeled(map)?), v);
        }
        Ok(DensityOperator { entries: out, caps: self.caps })
    }

    /// Smallest eigenvalue of the Hermitian part, via the real symmetric
    /// embedding of the support-restricted dense matrix.
    pub fn smallest_eigenvalue(&self) -> f64 {
        let mut basis: BTreeSet<&FockBasisState> = BTreeSet::new();
        for (a, b) in self.entries.keys() {
            basis.insert(a);
            basis.insert(b);
        }
        if basis.is_empty() {
            return 0.0;
        }
        let index: HashMap<&FockBasisState, usize> =
            basis.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let n = basis.len();
        let mut re = vec![vec![0.0; n]; n];
        let mut im = vec![vec![0.0; n]; n];
        for ((a, b), &v) in &self.entries {
            let (i, j) = (index[a], index[b]);
            // Hermitize so the embedding is exactly symmetric.
            re[i][j] += 0.5 * v.re;
            re[j][i] += 0.5 * v.re;
            im[i][j] += 0.5 * v.im;
            im[j][i] -= 0.5 * v.im;
        }
        // [[Re, -Im], [Im, Re]] has the same spectrum, doubled.
        let m = 2 * n;
        let mut s = vec![vec![0.0; m]; m];
        for i in 0..n {
            for j in 0..n {
                s[i][j] = re[i][j];
                s[i][n + j] = -im[i][j];
                s[n + i][j] = im[i][j];
                s[n + i][n + j] = re[i][j];
            }
        }
        jacobi_min_eigenvalue(s)
    }
}

/// Cyclic Jacobi rotations on a real symmetric matrix; returns the smallest
/// diagonal value after convergence.
fn jacobi_min_eigenvalue(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    if n == 1 {
        return a[0][0];
    }
    let scale: f64 = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |acc, &x| acc.max(x.abs()))
        .max(1e-300);
    for _ in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off.sqrt() < 1e-14 * scale {
            break;
        }
        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-18 * scale {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).fold(f64::INFINITY, f64::min)
}
