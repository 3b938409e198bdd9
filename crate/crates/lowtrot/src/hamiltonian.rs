//! k-local spin Hamiltonians: term tables, commuting-layer coloring,
//! positivity shifts, and dense assembly.
//!
//! A Hamiltonian enters as a list of Pauli strings with real coefficients.
//! Strings sharing a site set are grouped into a [`LocalTerm`]; greedy
//! first-fit coloring packs terms with pairwise disjoint site sets into
//! layers, so `H = Σ_{l=1}^L H_l` with each `H_l` a sum of at most `M`
//! commuting local terms. A positivity shift `H_l → H_l + a_l` then makes
//! every layer (and, in per-term mode, every local term) positive
//! semidefinite, which is the convention all bounds downstream assume.
//!
//! Structural parameters follow the usual conventions: `N` sites, locality
//! `k`, degree `d` (max number of terms touching one site), strength `J`
//! (max post-shift term norm), `M` terms per layer (after padding with
//! trivial terms so that `N ≤ ML ≤ dN`), and `L` layers.
//!
//! Matrix convention: site 0 is the most significant qubit, so `Z` on site 0
//! of a 2-site system assembles to `diag(1, 1, -1, -1)`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{C64, CMat, EigenSystem, HermitianOperator};
use crate::{Error, Result};

/// Default site cap: 2^12 = 4096-dimensional dense matrices stay tractable.
pub const DEFAULT_NMAX: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::InvalidInput(format!(
                "unknown Pauli letter {other:?} (expected X, Y or Z)"
            ))),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// One Pauli string `c · P_{s_1} ⊗ … ⊗ P_{s_m}` on strictly increasing sites.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub sites: Vec<usize>,
    pub letters: Vec<Pauli>,
    pub coefficient: f64,
}

impl PauliTerm {
    pub fn new(sites: Vec<usize>, letters: Vec<Pauli>, coefficient: f64) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidInput("Pauli term with no sites".into()));
        }
        if sites.len() != letters.len() {
            return Err(Error::InvalidInput(format!(
                "{} sites but {} Pauli letters",
                sites.len(),
                letters.len()
            )));
        }
        if !sites.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(format!(
                "sites {sites:?} not strictly increasing"
            )));
        }
        if !coefficient.is_finite() {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self {
            sites,
            letters,
            coefficient,
        })
    }
}

/// Positivity-shift placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftMode {
    /// Shift each local term to λ_min = 0 individually (every term PSD).
    /// This is the convention the bounds assume, hence the default.
    #[default]
    PerTerm,
    /// Shift each layer to λ_min = 0, distributing the shift uniformly over
    /// the layer's terms; individual terms may stay indefinite.
    PerLayer,
}

/// Group of Pauli strings sharing one site set, plus its positivity shift.
/// The represented operator is `Σ_i paulis_i + shift · I` on `sites`.
#[derive(Debug, Clone)]
pub struct LocalTerm {
    pub sites: Vec<usize>,
    pub paulis: Vec<PauliTerm>,
    pub shift: f64,
}

impl LocalTerm {
    /// Dense (shifted) block on the term's own sites; dimension `2^|sites|`,
    /// local position 0 (the smallest site) most significant.
    pub fn block(&self) -> Result<CMat> {
        let m = self.sites.len();
        let dim = 1usize << m;
        let mut out = CMat::zeros((dim, dim));
        let pos: HashMap<usize, usize> = self
            .sites
            .iter()
            .enumerate()
            .map(|(r, &s)| (s, r))
            .collect();
        for pt in &self.paulis {
            if pt.sites != self.sites {
                return Err(Error::InvalidInput(format!(
                    "grouped Pauli term on {:?} inside local term on {:?}",
                    pt.sites, self.sites
                )));
            }
            accumulate_pauli(&mut out, pt, m, |site| pos[&site]);
        }
        for b in 0..dim {
            out[[b, b]] += C64::new(self.shift, 0.0);
        }
        Ok(out)
    }

    fn block_eigs(&self) -> Result<EigenSystem> {
        EigenSystem::compute(&self.block()?)
    }

    /// Spectral norm of the shifted block.
    pub fn strength(&self) -> Result<f64> {
        let e = self.block_eigs()?;
        Ok(e.min_value().abs().max(e.max_value().abs()))
    }

    /// Smallest eigenvalue of the shifted block.
    pub fn lambda_min(&self) -> Result<f64> {
        Ok(self.block_eigs()?.min_value())
    }
}

/// Structural parameters consumed by every bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Site count.
    pub n: usize,
    /// Max locality (sites per term).
    pub k: usize,
    /// Degree: max number of terms containing any one site.
    pub d: usize,
    /// Max term strength, measured after the positivity shift.
    pub j: f64,
    /// Max terms per layer, after padding so that `N ≤ ML`.
    pub m: usize,
    /// Layer count.
    pub l: usize,
    /// Schedule length; 0 until a schedule is attached.
    pub q: usize,
    /// Schedule weight constant κ = (Σ_j |c_j|)/L ≥ 1; 1 until attached.
    pub kappa: f64,
}

impl SystemParams {
    /// Copy with schedule-dependent fields filled in.
    pub fn with_schedule(&self, q: usize, kappa: f64) -> Self {
        Self {
            q,
            kappa,
            ..*self
        }
    }
}

/// Where the positivity shift went, for translating energies between the
/// shifted and raw conventions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftRecord {
    pub mode: ShiftMode,
    /// Shift carried by each local term, index-aligned with `terms`.
    pub term_shifts: Vec<f64>,
    /// Total shift per layer.
    pub layer_shifts: Vec<f64>,
    /// Total identity offset added to `H`.
    pub total: f64,
}

/// A colored, shifted k-local Hamiltonian ready for assembly and bounds.
#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    pub n_sites: usize,
    pub terms: Vec<LocalTerm>,
    /// Term indices per layer; every index appears in exactly one layer and
    /// site sets within a layer are pairwise disjoint.
    pub layers: Vec<Vec<usize>>,
    pub params: SystemParams,
    pub shifts: ShiftRecord,
    /// Gallery name or "custom"; label only.
    pub model: String,
    pub seed: Option<u64>,
    pub n_max: usize,
}

/// Construction options for [`build_spec`].
#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub shift_mode: ShiftMode,
    /// Pad `M` up to `ceil(N/L)` with trivial (zero) terms so `N ≤ ML`;
    /// bookkeeping only, the dynamics never see the padding.
    pub padding: bool,
    pub n_max: usize,
    pub model: String,
    pub seed: Option<u64>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            shift_mode: ShiftMode::default(),
            padding: true,
            n_max: DEFAULT_NMAX,
            model: "custom".into(),
            seed: None,
        }
    }
}

/// Group raw Pauli strings by site set, color into commuting layers, apply
/// the positivity shift, and compute structural parameters.
pub fn build_spec(
    n_sites: usize,
    pauli_terms: Vec<PauliTerm>,
    opts: BuildOptions,
) -> Result<HamiltonianSpec> {
    if n_sites == 0 {
        return Err(Error::InvalidInput("zero sites".into()));
    }
    if pauli_terms.is_empty() {
        return Err(Error::InvalidInput("no terms".into()));
    }
    // Group by site set, preserving first-occurrence order for deterministic
    // coloring.
    let mut terms: Vec<LocalTerm> = Vec::new();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    for pt in pauli_terms {
        match index.get(&pt.sites) {
            Some(&i) => terms[i].paulis.push(pt),
            None => {
                index.insert(pt.sites.clone(), terms.len());
                terms.push(LocalTerm {
                    sites: pt.sites.clone(),
                    paulis: vec![pt],
                    shift: 0.0,
                });
            }
        }
    }
    let k = terms.iter().map(|t| t.sites.len()).max().unwrap();
    let layers = color_layers(&terms, n_sites, k)?;

    let mut term_shifts = vec![0.0; terms.len()];
    let mut layer_shifts = vec![0.0; layers.len()];
    for (li, layer) in layers.iter().enumerate() {
        let mut batch: Vec<LocalTerm> = layer.iter().map(|&i| terms[i].clone()).collect();
        layer_shifts[li] = shift_positive(&mut batch, opts.shift_mode)?;
        for (&i, shifted) in layer.iter().zip(batch) {
            term_shifts[i] = shifted.shift;
            terms[i] = shifted;
        }
    }
    let total = layer_shifts.iter().sum();

    let params = parameters(n_sites, &terms, &layers, opts.padding)?;
    Ok(HamiltonianSpec {
        n_sites,
        terms,
        layers,
        params,
        shifts: ShiftRecord {
            mode: opts.shift_mode,
            term_shifts,
            layer_shifts,
            total,
        },
        model: opts.model,
        seed: opts.seed,
        n_max: opts.n_max,
    })
}

/// Greedy first-fit coloring of terms into layers of pairwise-disjoint site
/// sets. Deterministic: terms are scanned in index order and placed in the
/// first layer with no site conflict. The number of layers is at most
/// `k(d-1)+1` (greedy needs at most conflict-degree + 1 colors).
pub fn color_layers(terms: &[LocalTerm], n_sites: usize, k_cap: usize) -> Result<Vec<Vec<usize>>> {
    if terms.is_empty() {
        return Err(Error::InvalidInput("no terms to color".into()));
    }
    for t in terms {
        if t.sites.len() > k_cap {
            return Err(Error::InvalidInput(format!(
                "term on {:?} exceeds locality cap k = {k_cap}",
                t.sites
            )));
        }
        if let Some(&s) = t.sites.iter().find(|&&s| s >= n_sites) {
            return Err(Error::InvalidInput(format!(
                "site index {s} out of range for {n_sites} sites"
            )));
        }
    }
    let mut layers: Vec<Vec<usize>> = Vec::new();
    let mut occupied: Vec<HashSet<usize>> = Vec::new();
    for (i, t) in terms.iter().enumerate() {
        let fit = occupied
            .iter()
            .position(|occ| t.sites.iter().all(|s| !occ.contains(s)));
        match fit {
            Some(li) => {
                layers[li].push(i);
                occupied[li].extend(t.sites.iter().copied());
            }
            None => {
                layers.push(vec![i]);
                occupied.push(t.sites.iter().copied().collect());
            }
        }
    }
    Ok(layers)
}

/// Shift one layer (terms with pairwise disjoint site sets) to positive
/// semidefiniteness. Returns the total shift added to the layer. Because the
/// site sets are disjoint, `λ_min(H_l) = Σ_t λ_min(t)` exactly, so the shift
/// can be computed from the small blocks. Idempotent: a second call adds 0.
pub fn shift_positive(layer: &mut [LocalTerm], mode: ShiftMode) -> Result<f64> {
    if layer.is_empty() {
        return Ok(0.0);
    }
    match mode {
        ShiftMode::PerTerm => {
            let mut total = 0.0;
            for t in layer.iter_mut() {
                let inc = (-t.lambda_min()?).max(0.0);
                t.shift += inc;
                total += inc;
            }
            Ok(total)
        }
        ShiftMode::PerLayer => {
            let mut lam_min = 0.0;
            for t in layer.iter() {
                lam_min += t.lambda_min()?;
            }
            let inc = (-lam_min).max(0.0);
            let share = inc / layer.len() as f64;
            for t in layer.iter_mut() {
                t.shift += share;
            }
            Ok(inc)
        }
    }
}

/// Structural parameters `(N, k, d, J, M, L)` from a colored, shifted term
/// list. With `padding` on, `M` is raised to `ceil(N/L)` (trivial zero terms
/// per layer — bookkeeping only) so that `N ≤ ML`.
pub fn parameters(
    n_sites: usize,
    terms: &[LocalTerm],
    layers: &[Vec<usize>],
    padding: bool,
) -> Result<SystemParams> {
    let k = terms.iter().map(|t| t.sites.len()).max().unwrap_or(0);
    let mut incidence = vec![0usize; n_sites];
    for t in terms {
        for &s in &t.sites {
            incidence[s] += 1;
        }
    }
    let d = incidence.iter().copied().max().unwrap_or(0);
    let mut j = 0.0f64;
    for t in terms {
        j = j.max(t.strength()?);
    }
    let l = layers.len();
    let m_raw = layers.iter().map(|la| la.len()).max().unwrap_or(0);
    if k == 0 || d == 0 || l == 0 || m_raw == 0 {
        return Err(Error::InvalidInput("empty term structure".into()));
    }
    if j <= 0.0 {
        return Err(Error::InvalidInput("all terms have zero strength".into()));
    }
    let m = if m_raw * l >= n_sites {
        m_raw
    } else if padding {
        n_sites.div_euclid(l) + usize::from(n_sites % l != 0)
    } else {
        return Err(Error::InvalidInput(format!(
            "ML = {} < N = {n_sites} and padding disabled",
            m_raw * l
        )));
    };
    if m * l > d * n_sites {
        return Err(Error::InvalidInput(format!(
            "ML = {} exceeds dN = {}",
            m * l,
            d * n_sites
        )));
    }
    if l > k * (d.saturating_sub(1)) + 1 {
        return Err(Error::InvalidInput(format!(
            "layer count {l} exceeds k(d-1)+1 = {}",
            k * (d - 1) + 1
        )));
    }
    Ok(SystemParams {
        n: n_sites,
        k,
        d,
        j,
        m,
        l,
        q: 0,
        kappa: 1.0,
    })
}

/// Assembly target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Full,
    Layer(usize),
}

/// Dense `2^N`-dimensional assembly of the full Hamiltonian or one layer,
/// shifts included. Site 0 is the most significant qubit.
pub fn assemble_dense(spec: &HamiltonianSpec, which: Which) -> Result<HermitianOperator> {
    if spec.n_sites > spec.n_max {
        return Err(Error::DimensionCap {
            n: spec.n_sites,
            cap: spec.n_max,
        });
    }
    let n = spec.n_sites;
    let dim = 1usize << n;
    let term_indices: Vec<usize> = match which {
        Which::Full => (0..spec.terms.len()).collect(),
        Which::Layer(l) => spec
            .layers
            .get(l)
            .ok_or_else(|| Error::InvalidInput(format!("layer {l} out of range")))?
            .clone(),
    };
    let mut out = CMat::zeros((dim, dim));
    for &ti in &term_indices {
        let t = &spec.terms[ti];
        for pt in &t.paulis {
            accumulate_pauli(&mut out, pt, n, |site| site);
        }
        for b in 0..dim {
            out[[b, b]] += C64::new(t.shift, 0.0);
        }
    }
    HermitianOperator::new(out)
}

/// Add `coeff · P` for one Pauli string into `out`, where the string's site
/// `s` maps to qubit position `pos(s)` (position 0 most significant) in a
/// `2^n`-dimensional space. Each Pauli string has exactly one nonzero entry
/// per column: `P|b⟩ = phase · |b ⊕ flips⟩`.
fn accumulate_pauli(out: &mut CMat, pt: &PauliTerm, n: usize, pos: impl Fn(usize) -> usize) {
    let dim = 1usize << n;
    for b in 0..dim {
        let mut phase = C64::new(pt.coefficient, 0.0);
        let mut b2 = b;
        for (&site, &letter) in pt.sites.iter().zip(&pt.letters) {
            let bitpos = n - 1 - pos(site);
            let bit = (b >> bitpos) & 1;
            match letter {
                Pauli::X => b2 ^= 1 << bitpos,
                Pauli::Y => {
                    b2 ^= 1 << bitpos;
                    // Y|0⟩ = i|1⟩, Y|1⟩ = -i|0⟩.
                    phase *= if bit == 0 {
                        C64::new(0.0, 1.0)
                    } else {
                        C64::new(0.0, -1.0)
                    };
                }
                Pauli::Z => {
                    if bit == 1 {
                        phase = -phase;
                    }
                }
            }
        }
        out[[b2, b]] += phase;
    }
}

/// Built-in models. Couplings not in the map take defaults (`j = 1`,
/// `h = 1`); `random_klocal` reads `seed`, `k`, `d` and optional `terms`
/// from the map and is reproducible for a fixed seed.
pub fn model_gallery(
    name: &str,
    n: usize,
    couplings: &BTreeMap<String, f64>,
) -> Result<HamiltonianSpec> {
    let get = |key: &str, default: f64| couplings.get(key).copied().unwrap_or(default);
    let check_keys = |allowed: &[&str]| -> Result<()> {
        for key in couplings.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "unknown coupling {key:?} for model (allowed: {allowed:?})"
                )));
            }
        }
        Ok(())
    };
    let chain_guard = || -> Result<()> {
        if n < 2 {
            Err(Error::InvalidInput(format!("chain needs ≥ 2 sites, got {n}")))
        } else {
            Ok(())
        }
    };
    let mut opts = BuildOptions {
        model: name.into(),
        ..BuildOptions::default()
    };
    match name {
        "heisenberg_chain" => {
            check_keys(&["j"])?;
            chain_guard()?;
            let j = get("j", 1.0);
            let mut terms = Vec::new();
            for i in 0..n - 1 {
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    terms.push(PauliTerm::new(vec![i, i + 1], vec![p, p], j / 4.0)?);
                }
            }
            build_spec(n, terms, opts)
        }
        "xy_chain" => {
            check_keys(&["j"])?;
            chain_guard()?;
            let j = get("j", 1.0);
            let mut terms = Vec::new();
            for i in 0..n - 1 {
                for p in [Pauli::X, Pauli::Y] {
                    terms.push(PauliTerm::new(vec![i, i + 1], vec![p, p], j / 4.0)?);
                }
            }
            build_spec(n, terms, opts)
        }
        "tfim_chain" => {
            check_keys(&["j", "h"])?;
            chain_guard()?;
            let j = get("j", 1.0);
            let h = get("h", 1.0);
            // Fields first: greedy coloring then yields one X-field layer
            // followed by even/odd ZZ layers.
            let mut terms = Vec::new();
            for i in 0..n {
                terms.push(PauliTerm::new(vec![i], vec![Pauli::X], -h)?);
            }
            for i in 0..n - 1 {
                terms.push(PauliTerm::new(
                    vec![i, i + 1],
                    vec![Pauli::Z, Pauli::Z],
                    -j,
                )?);
            }
            build_spec(n, terms, opts)
        }
        "random_klocal" => {
            check_keys(&["seed", "k", "d", "terms"])?;
            let seed_f = get("seed", 0.0);
            if seed_f < 0.0 || seed_f.fract() != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "seed must be a nonnegative integer, got {seed_f}"
                )));
            }
            let seed = seed_f as u64;
            let k = get("k", 2.0) as usize;
            let d = get("d", 3.0) as usize;
            let target = get("terms", n as f64) as usize;
            if k < 1 || k > n {
                return Err(Error::InvalidInput(format!("need 1 ≤ k ≤ N, got k = {k}")));
            }
            if d < 1 || target < 1 {
                return Err(Error::InvalidInput("need d ≥ 1 and terms ≥ 1".into()));
            }
            opts.seed = Some(seed);
            let terms = random_klocal_terms(seed, n, k, d, target)?;
            build_spec(n, terms, opts)
        }
        other => Err(Error::UnknownModel(other.into())),
    }
}

fn random_klocal_terms(
    seed: u64,
    n: usize,
    k: usize,
    d: usize,
    target: usize,
) -> Result<Vec<PauliTerm>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![0usize; n];
    let mut used: HashSet<Vec<usize>> = HashSet::new();
    let mut terms = Vec::new();
    let mut attempts = 0usize;
    while terms.len() < target && attempts < 200 * target {
        attempts += 1;
        let size = rng.random_range(1..=k);
        let eligible: Vec<usize> = (0..n).filter(|&s| degree[s] < d).collect();
        if eligible.len() < size {
            break;
        }
        // Partial Fisher-Yates for `size` distinct eligible sites.
        let mut pool = eligible;
        let mut sites = Vec::with_capacity(size);
        for _ in 0..size {
            let i = rng.random_range(0..pool.len());
            sites.push(pool.swap_remove(i));
        }
        sites.sort_unstable();
        if used.contains(&sites) {
            continue;
        }
        let letters: Vec<Pauli> = (0..size)
            .map(|_| match rng.random_range(0..3u8) {
                0 => Pauli::X,
                1 => Pauli::Y,
                _ => Pauli::Z,
            })
            .collect();
        let coefficient = rng.random_range(-1.0..1.0);
        for &s in &sites {
            degree[s] += 1;
        }
        used.insert(sites.clone());
        terms.push(PauliTerm::new(sites, letters, coefficient)?);
    }
    if terms.is_empty() {
        return Err(Error::InvalidInput(
            "random_klocal produced no terms (constraints too tight)".into(),
        ));
    }
    Ok(terms)
}

/// One line of the term-table interchange format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermTableEntry {
    pub sites: Vec<usize>,
    /// Pauli letters as a string, e.g. "XZ".
    pub paulis: String,
    pub coeff: f64,
}

/// Term-table file: raw (unshifted) Pauli strings plus the shift mode to
/// apply on load. Building from a table reproduces coloring, shifts and
/// parameters deterministically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermTable {
    pub n_sites: usize,
    pub terms: Vec<TermTableEntry>,
    #[serde(default)]
    pub shift_mode: ShiftMode,
}

impl TermTable {
    pub fn from_spec(spec: &HamiltonianSpec) -> Self {
        let mut terms = Vec::new();
        for t in &spec.terms {
            for pt in &t.paulis {
                terms.push(TermTableEntry {
                    sites: pt.sites.clone(),
                    paulis: pt.letters.iter().map(|p| p.as_char()).collect(),
                    coeff: pt.coefficient,
                });
            }
        }
        Self {
            n_sites: spec.n_sites,
            terms,
            shift_mode: spec.shifts.mode,
        }
    }

    pub fn to_spec(&self) -> Result<HamiltonianSpec> {
        let mut terms = Vec::new();
        for e in &self.terms {
            let letters: Result<Vec<Pauli>> = e.paulis.chars().map(Pauli::from_char).collect();
            terms.push(PauliTerm::new(e.sites.clone(), letters?, e.coeff)?);
        }
        build_spec(
            self.n_sites,
            terms,
            BuildOptions {
                shift_mode: self.shift_mode,
                ..BuildOptions::default()
            },
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
