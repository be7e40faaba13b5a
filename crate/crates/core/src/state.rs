//! State vectors and linear operators for a single n-pulse block.
//!
//! A block carries one photon spread over `n` time slots. Before Bob's
//! interferometer the photon lives in the input modes `D_1..D_n`; after it the
//! photon occupies `U_1..U_{n+1}` (top port) and `V_1..V_{n+1}` (bottom port).
//! All slot and pulse indices in the public API are 1-based.
//!
//! Alice's side of the entanglement-based picture is an (n-1)-qubit register
//! holding the key `j = (j_1 .. j_{n-1})`, with `j_1` the most significant bit
//! of the integer key.

use nalgebra::{DMatrix, DVector, Matrix4};
use num_complex::Complex64;

use crate::attack::AttackMatrix;
use crate::error::{domain, Error, Result};

pub type C64 = Complex64;

/// Largest block length accepted for joint (Alice ⊗ Bob) states. The joint
/// dimension grows as `2^(n-1) * 2(n+1)`.
pub const MAX_JOINT_N: usize = 16;

/// Largest block length accepted for single-photon states and operators.
pub const MAX_BLOCK_N: usize = 64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisKind {
    /// Pulse modes `D_1..D_n` entering the interferometer.
    Input,
    /// Output modes `U_1..U_{n+1}, V_1..V_{n+1}`.
    Output,
}

/// A single-photon mode label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    D(usize),
    U(usize),
    V(usize),
}

/// Mode basis of a block of length `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeBasis {
    kind: BasisKind,
    n: usize,
}

impl ModeBasis {
    pub fn new(kind: BasisKind, n: usize) -> Result<Self> {
        check_block_length(n, MAX_BLOCK_N)?;
        Ok(Self { kind, n })
    }

    pub fn input(n: usize) -> Result<Self> {
        Self::new(BasisKind::Input, n)
    }

    pub fn output(n: usize) -> Result<Self> {
        Self::new(BasisKind::Output, n)
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `n` for the input basis, `2(n+1)` for the output basis.
    pub fn dim(&self) -> usize {
        match self.kind {
            BasisKind::Input => self.n,
            BasisKind::Output => 2 * (self.n + 1),
        }
    }

    /// Storage index of `mode`, or `None` if the mode is not part of this basis.
    pub fn index(&self, mode: Mode) -> Option<usize> {
        match (self.kind, mode) {
            (BasisKind::Input, Mode::D(k)) if (1..=self.n).contains(&k) => Some(k - 1),
            (BasisKind::Output, Mode::U(l)) if (1..=self.n + 1).contains(&l) => Some(l - 1),
            (BasisKind::Output, Mode::V(l)) if (1..=self.n + 1).contains(&l) => {
                Some(self.n + 1 + l - 1)
            }
            _ => None,
        }
    }

    /// Inverse of [`ModeBasis::index`].
    pub fn mode(&self, index: usize) -> Option<Mode> {
        match self.kind {
            BasisKind::Input if index < self.n => Some(Mode::D(index + 1)),
            BasisKind::Output if index < self.n + 1 => Some(Mode::U(index + 1)),
            BasisKind::Output if index < 2 * (self.n + 1) => Some(Mode::V(index - self.n)),
            _ => None,
        }
    }

    fn expect(&self, other: &ModeBasis) -> Result<()> {
        if self != other {
            return Err(Error::BasisMismatch {
                expected: format!("{self}"),
                actual: format!("{other}"),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for ModeBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            BasisKind::Input => write!(f, "input basis (n={})", self.n),
            BasisKind::Output => write!(f, "output basis (n={})", self.n),
        }
    }
}

fn check_block_length(n: usize, max: usize) -> Result<()> {
    if n < 2 {
        return Err(domain(format!("block length must be at least 2, got {n}")));
    }
    if n > max {
        return Err(domain(format!("block length {n} exceeds the supported maximum {max}")));
    }
    Ok(())
}

fn check_slot(n: usize, l: usize, lo: usize) -> Result<()> {
    if l < lo || l > n {
        return Err(domain(format!("slot {l} outside {lo}..={n}")));
    }
    Ok(())
}

/// Amplitude vector of a single photon over a mode basis. Filtered or
/// attacked states may be subnormalized; their squared norm is a probability.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonState {
    basis: ModeBasis,
    amplitudes: DVector<C64>,
}

impl PhotonState {
    pub fn new(basis: ModeBasis, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(domain(format!(
                "{} amplitudes supplied for {basis} of dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn zeros(basis: ModeBasis) -> Self {
        Self {
            basis,
            amplitudes: DVector::zeros(basis.dim()),
        }
    }

    /// Superposition `Σ c_m |m⟩` of the listed modes.
    pub fn from_modes(basis: ModeBasis, terms: &[(Mode, C64)]) -> Result<Self> {
        let mut state = Self::zeros(basis);
        for &(mode, c) in terms {
            let i = basis
                .index(mode)
                .ok_or_else(|| domain(format!("{mode:?} is not a mode of {basis}")))?;
            state.amplitudes[i] += c;
        }
        Ok(state)
    }

    pub fn basis(&self) -> ModeBasis {
        self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// Amplitude on `mode`; zero for modes outside the basis.
    pub fn amplitude(&self, mode: Mode) -> C64 {
        self.basis
            .index(mode)
            .map_or(ZERO, |i| self.amplitudes[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &PhotonState) -> Result<C64> {
        self.basis.expect(&other.basis)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Dense linear map between two mode bases.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOperator {
    domain: ModeBasis,
    codomain: ModeBasis,
    matrix: DMatrix<C64>,
}

impl LinearOperator {
    pub fn new(domain: ModeBasis, codomain: ModeBasis, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != codomain.dim() || matrix.ncols() != domain.dim() {
            return Err(domain_err_shape(&matrix, domain, codomain));
        }
        Ok(Self {
            domain,
            codomain,
            matrix,
        })
    }

    pub fn identity(basis: ModeBasis) -> Self {
        Self {
            domain: basis,
            codomain: basis,
            matrix: DMatrix::identity(basis.dim(), basis.dim()),
        }
    }

    pub fn domain(&self) -> ModeBasis {
        self.domain
    }

    pub fn codomain(&self) -> ModeBasis {
        self.codomain
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn apply(&self, state: &PhotonState) -> Result<PhotonState> {
        self.domain.expect(&state.basis)?;
        Ok(PhotonState {
            basis: self.codomain,
            amplitudes: &self.matrix * &state.amplitudes,
        })
    }

    pub fn adjoint(&self) -> Self {
        Self {
            domain: self.codomain,
            codomain: self.domain,
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearOperator) -> Result<Self> {
        self.domain.expect(&inner.codomain)?;
        Ok(Self {
            domain: inner.domain,
            codomain: self.codomain,
            matrix: &self.matrix * &inner.matrix,
        })
    }

    pub fn add(&self, other: &LinearOperator) -> Result<Self> {
        self.domain.expect(&other.domain)?;
        self.codomain.expect(&other.codomain)?;
        Ok(Self {
            domain: self.domain,
            codomain: self.codomain,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &LinearOperator) -> Result<Self> {
        self.domain.expect(&other.domain)?;
        self.codomain.expect(&other.codomain)?;
        Ok(Self {
            domain: self.domain,
            codomain: self.codomain,
            matrix: &self.matrix - &other.matrix,
        })
    }
}

fn domain_err_shape(matrix: &DMatrix<C64>, domain: ModeBasis, codomain: ModeBasis) -> Error {
    Error::Domain(format!(
        "operator matrix is {}x{}, expected {}x{} for {domain} -> {codomain}",
        matrix.nrows(),
        matrix.ncols(),
        codomain.dim(),
        domain.dim()
    ))
}

/// The 1-bit-delay Mach-Zehnder interferometer with the bottom-port π/2
/// rotation folded in:
/// `|D_k⟩ ↦ ½(|U_k⟩ − |V_k⟩ + |U_{k+1}⟩ + |V_{k+1}⟩)`.
pub fn interferometer(n: usize) -> Result<LinearOperator> {
    let input = ModeBasis::input(n)?;
    let output = ModeBasis::output(n)?;
    let mut m = DMatrix::zeros(output.dim(), input.dim());
    let half = C64::new(0.5, 0.0);
    for k in 1..=n {
        let col = k - 1;
        m[(output.index(Mode::U(k)).unwrap(), col)] += half;
        m[(output.index(Mode::V(k)).unwrap(), col)] -= half;
        m[(output.index(Mode::U(k + 1)).unwrap(), col)] += half;
        m[(output.index(Mode::V(k + 1)).unwrap(), col)] += half;
    }
    LinearOperator::new(input, output, m)
}

fn slot_projector(output: ModeBasis, l: usize) -> DMatrix<C64> {
    let mut p = DMatrix::zeros(output.dim(), output.dim());
    for mode in [Mode::U(l), Mode::V(l)] {
        let i = output.index(mode).unwrap();
        p[(i, i)] = ONE;
    }
    p
}

/// Bob's time-slot filter `F_l`. For `l` in `2..=n` this is the projector
/// onto `{|U_l⟩, |V_l⟩}`; `l = 1` is the inconclusive remainder
/// `I − Σ_{m=2}^{n} F_m`.
pub fn filter(n: usize, l: usize) -> Result<LinearOperator> {
    let output = ModeBasis::output(n)?;
    check_slot(n, l, 1)?;
    let matrix = if l == 1 {
        let mut rest = DMatrix::identity(output.dim(), output.dim());
        for m in 2..=n {
            rest -= slot_projector(output, m);
        }
        rest
    } else {
        slot_projector(output, l)
    };
    LinearOperator::new(output, output, matrix)
}

/// `Z_{B_l} = |U_l⟩⟨U_l| − |V_l⟩⟨V_l|` on the output basis.
pub fn pauli_z_bob(n: usize, l: usize) -> Result<LinearOperator> {
    let output = ModeBasis::output(n)?;
    check_slot(n + 1, l, 1)?;
    let mut z = DMatrix::zeros(output.dim(), output.dim());
    let (u, v) = (output.index(Mode::U(l)).unwrap(), output.index(Mode::V(l)).unwrap());
    z[(u, u)] = ONE;
    z[(v, v)] = -ONE;
    LinearOperator::new(output, output, z)
}

/// `X_{B_l} = |U_l⟩⟨V_l| + |V_l⟩⟨U_l|` on the output basis.
pub fn pauli_x_bob(n: usize, l: usize) -> Result<LinearOperator> {
    let output = ModeBasis::output(n)?;
    check_slot(n + 1, l, 1)?;
    let mut x = DMatrix::zeros(output.dim(), output.dim());
    let (u, v) = (output.index(Mode::U(l)).unwrap(), output.index(Mode::V(l)).unwrap());
    x[(u, v)] = ONE;
    x[(v, u)] = ONE;
    LinearOperator::new(output, output, x)
}

/// Bit `j_q` (1-based, `q` in `1..n`) of the key, most significant first.
pub fn key_bit(n: usize, key: u64, q: usize) -> u64 {
    (key >> (n - 1 - q)) & 1
}

/// Number of distinct keys carried by a block, `2^(n-1)`.
pub fn key_count(n: usize) -> u64 {
    1u64 << (n - 1)
}

/// Relative phase signs `s_k = (−1)^{j'_{k-1}}` of pulses `1..=n`, where
/// `j'_m` is the running sum of the first `m` key bits and `s_1 = +1`.
pub fn encoding_signs(n: usize, key: u64) -> Vec<f64> {
    let mut signs = Vec::with_capacity(n);
    signs.push(1.0);
    let mut running = 0;
    for k in 2..=n {
        running += key_bit(n, key, k - 1);
        signs.push(if running % 2 == 0 { 1.0 } else { -1.0 });
    }
    signs
}

/// Alice's encoded block `|φ_j⟩ = (1/√n)[|D_1⟩ + Σ_{k≥2} (−1)^{j'_{k-1}} |D_k⟩]`.
pub fn build_encoded_state(n: usize, key: u64) -> Result<PhotonState> {
    let basis = ModeBasis::input(n)?;
    if n > 64 || key >= key_count(n) {
        return Err(domain(format!("key {key} does not fit in {} bits", n - 1)));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let amps = encoding_signs(n, key)
        .into_iter()
        .map(|s| C64::new(s * scale, 0.0));
    Ok(PhotonState {
        basis,
        amplitudes: DVector::from_iterator(n, amps),
    })
}

/// Applies the interferometer to an input-basis photon.
pub fn apply_mz(state: &PhotonState) -> Result<PhotonState> {
    if state.basis.kind != BasisKind::Input {
        return Err(Error::BasisMismatch {
            expected: "input basis".into(),
            actual: format!("{}", state.basis),
        });
    }
    interferometer(state.basis.n)?.apply(state)
}

/// Applies `F_l` to an output-basis photon. The squared norm of the result is
/// the probability of that filter outcome.
pub fn apply_filter(state: &PhotonState, l: usize) -> Result<PhotonState> {
    if state.basis.kind != BasisKind::Output {
        return Err(Error::BasisMismatch {
            expected: "output basis".into(),
            actual: format!("{}", state.basis),
        });
    }
    filter(state.basis.n, l)?.apply(state)
}

/// Joint state of Alice's (n-1)-qubit register and Bob's photon. Storage is
/// key-major: amplitude of `|j⟩_A ⊗ |m⟩_B` sits at `j * dim_B + index(m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    n: usize,
    bob: ModeBasis,
    amplitudes: DVector<C64>,
}

impl JointState {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bob_basis(&self) -> ModeBasis {
        self.bob
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn alice_dim(&self) -> usize {
        1 << (self.n - 1)
    }

    pub fn dim(&self) -> usize {
        self.alice_dim() * self.bob.dim()
    }

    pub fn amplitude(&self, key: u64, mode: Mode) -> C64 {
        match self.bob.index(mode) {
            Some(i) if key < key_count(self.n) => {
                self.amplitudes[key as usize * self.bob.dim() + i]
            }
            _ => ZERO,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    fn block(&self, key: usize) -> &[C64] {
        let d = self.bob.dim();
        &self.amplitudes.as_slice()[key * d..(key + 1) * d]
    }

    /// `(1_A ⊗ op)` applied to the joint state.
    pub fn apply_bob(&self, op: &LinearOperator) -> Result<JointState> {
        self.bob.expect(&op.domain)?;
        let (din, dout) = (op.domain.dim(), op.codomain.dim());
        let mut out = DVector::zeros(self.alice_dim() * dout);
        let m = &op.matrix;
        for key in 0..self.alice_dim() {
            let src = self.block(key);
            let dst = &mut out.as_mut_slice()[key * dout..(key + 1) * dout];
            for (col, &a) in src.iter().enumerate().take(din) {
                if a == ZERO {
                    continue;
                }
                for (row, d) in dst.iter_mut().enumerate() {
                    *d += m[(row, col)] * a;
                }
            }
        }
        Ok(JointState {
            n: self.n,
            bob: op.codomain,
            amplitudes: out,
        })
    }

    /// Eve's attack component acting on Bob's incoming photon.
    pub fn attack(&self, attack: &AttackMatrix) -> Result<JointState> {
        if attack.n() != self.n {
            return Err(domain(format!(
                "attack matrix is {0}x{0} but the block length is {1}",
                attack.n(),
                self.n
            )));
        }
        self.apply_bob(&attack.as_operator()?)
    }

    /// Projects Alice's register onto `|key⟩`. Returns the outcome probability
    /// and Bob's normalized conditional state (`None` if the probability is 0).
    pub fn project_alice(&self, key: u64) -> Result<(f64, Option<PhotonState>)> {
        if key >= key_count(self.n) {
            return Err(domain(format!("key {key} out of range for n={}", self.n)));
        }
        let block = self.block(key as usize);
        let p: f64 = block.iter().map(|c| c.norm_sqr()).sum();
        if p == 0.0 {
            return Ok((p, None));
        }
        let scale = 1.0 / p.sqrt();
        let amps = DVector::from_iterator(block.len(), block.iter().map(|c| c * scale));
        Ok((p, Some(PhotonState::new(self.bob, amps)?)))
    }

    /// Bob's reduced density matrix `Tr_A |ψ⟩⟨ψ|` (unnormalized).
    pub fn reduced_bob(&self) -> DMatrix<C64> {
        let d = self.bob.dim();
        let mut rho = DMatrix::zeros(d, d);
        for key in 0..self.alice_dim() {
            let b = self.block(key);
            for r in 0..d {
                for c in 0..d {
                    rho[(r, c)] += b[r] * b[c].conj();
                }
            }
        }
        rho
    }

    fn slot_indices(&self, l: usize) -> Result<(usize, usize)> {
        if self.bob.kind != BasisKind::Output {
            return Err(Error::BasisMismatch {
                expected: "output basis".into(),
                actual: format!("{}", self.bob),
            });
        }
        check_slot(self.n, l, 2)?;
        Ok((
            self.bob.index(Mode::U(l)).unwrap(),
            self.bob.index(Mode::V(l)).unwrap(),
        ))
    }

    /// Unnormalized 4×4 density matrix of the pair (A_{l−1}, B_l), tracing the
    /// other Alice qubits and all Bob modes outside slot `l`. Pair basis index
    /// is `2a + b` with `b = 0` for `U_l` and `b = 1` for `V_l`.
    pub fn pair_density(&self, l: usize) -> Result<Matrix4<C64>> {
        let (u, v) = self.slot_indices(l)?;
        let mut rho = Matrix4::zeros();
        let shift = self.n - 1 - (l - 1);
        let d = self.bob.dim();
        let amps = self.amplitudes.as_slice();
        for key in 0..self.alice_dim() {
            if (key >> shift) & 1 == 1 {
                continue;
            }
            let partner = key | (1 << shift);
            let vec = [
                amps[key * d + u],
                amps[key * d + v],
                amps[partner * d + u],
                amps[partner * d + v],
            ];
            for r in 0..4 {
                for c in 0..4 {
                    rho[(r, c)] += vec[r] * vec[c].conj();
                }
            }
        }
        Ok(rho)
    }

    /// `⟨ψ| Z_{A_{l−1}} Z_{B_l} |ψ⟩` and `⟨ψ| X_{A_{l−1}} X_{B_l} |ψ⟩`, evaluated
    /// directly on the amplitude vector.
    pub fn pauli_pair_expectations(&self, l: usize) -> Result<(f64, f64)> {
        let (u, v) = self.slot_indices(l)?;
        let shift = self.n - 1 - (l - 1);
        let d = self.bob.dim();
        let amps = self.amplitudes.as_slice();
        let mut zz = 0.0;
        let mut xx = ZERO;
        for key in 0..self.alice_dim() {
            let za = if (key >> shift) & 1 == 0 { 1.0 } else { -1.0 };
            let flipped = key ^ (1 << shift);
            let (au, av) = (amps[key * d + u], amps[key * d + v]);
            zz += za * (au.norm_sqr() - av.norm_sqr());
            xx += au.conj() * amps[flipped * d + v] + av.conj() * amps[flipped * d + u];
        }
        Ok((zz, xx.re))
    }
}

/// `(1/√2^{n−1}) Σ_j |j⟩_A ⊗ |φ_j⟩_B` for `j = 0 .. 2^{n−1} − 1`.
pub fn build_entangled_state(n: usize) -> Result<JointState> {
    check_block_length(n, MAX_JOINT_N)?;
    let bob = ModeBasis::input(n)?;
    let keys = key_count(n);
    let weight = 1.0 / (keys as f64).sqrt();
    let mut amps = Vec::with_capacity(keys as usize * n);
    for key in 0..keys {
        let phi = build_encoded_state(n, key)?;
        amps.extend(phi.amplitudes.iter().map(|c| c * weight));
    }
    Ok(JointState {
        n,
        bob,
        amplitudes: DVector::from_vec(amps),
    })
}

/// `M_DPS (1 ⊗ E) |φ⟩`, the joint state after the attack and the interferometer
/// but before the filter.
pub fn received_state(attack: &AttackMatrix) -> Result<JointState> {
    let n = attack.n();
    build_entangled_state(n)?
        .attack(attack)?
        .apply_bob(&interferometer(n)?)
}

/// `|φ_l⟩ = F_l M_DPS (1 ⊗ E) |φ⟩`.
pub fn filtered_state(attack: &AttackMatrix, l: usize) -> Result<JointState> {
    let n = attack.n();
    check_slot(n, l, 1)?;
    received_state(attack)?.apply_bob(&filter(n, l)?)
}

/// Probabilities of the filter outcomes `F_1..F_n` under `attack`, indexed by
/// `l − 1` (entry 0 is the inconclusive outcome).
pub fn filter_probabilities(attack: &AttackMatrix) -> Result<Vec<f64>> {
    let n = attack.n();
    let received = received_state(attack)?;
    (1..=n)
        .map(|l| Ok(received.apply_bob(&filter(n, l)?)?.norm_sqr()))
        .collect()
}

/// Outcome of conditioning on a conclusive filter slot.
#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum PairOutcome {
    /// The attack leaves no amplitude in the slot.
    Unoccupied,
    Occupied {
        /// Joint probability of the slot outcome.
        probability: f64,
        /// Normalized density matrix on (A_{l−1}, B_l).
        density: Matrix4<C64>,
    },
}

impl PairOutcome {
    pub fn probability(&self) -> f64 {
        match self {
            PairOutcome::Unoccupied => 0.0,
            PairOutcome::Occupied { probability, .. } => *probability,
        }
    }
}

/// Conditional two-qubit state shared by Alice and Bob after Bob's filter
/// reports slot `l`.
pub fn conditional_pair_state(attack: &AttackMatrix, l: usize) -> Result<PairOutcome> {
    check_slot(attack.n(), l, 2)?;
    let state = filtered_state(attack, l)?;
    let rho = state.pair_density(l)?;
    let probability = rho.trace().re;
    // Cancellation can leave round-off sized mass in a slot that is empty in
    // exact arithmetic; measure it against the attack's overall scale.
    if probability <= 1e-24 * attack.frobenius_norm_sqr() || probability == 0.0 {
        return Ok(PairOutcome::Unoccupied);
    }
    Ok(PairOutcome::Occupied {
        probability,
        density: rho / C64::new(probability, 0.0),
    })
}

/// `|Φ+⟩ = (|0⟩|U_l⟩ + |1⟩|V_l⟩)/√2` in the pair basis of [`JointState::pair_density`].
pub fn bell_phi_plus() -> [C64; 4] {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [h, ZERO, ZERO, h]
}

/// `⟨Φ+| ρ |Φ+⟩`.
pub fn bell_fidelity(rho: &Matrix4<C64>) -> f64 {
    let phi = bell_phi_plus();
    let mut f = ZERO;
    for r in 0..4 {
        for c in 0..4 {
            f += phi[r].conj() * rho[(r, c)] * phi[c];
        }
    }
    f.re
}

/// Joint bit- and phase-error expectations
/// `⟨φ_l| (1 − Z_{A_{l−1}} Z_{B_l})/2 |φ_l⟩` and
/// `⟨φ_l| (1 − X_{A_{l−1}} X_{B_l})/2 |φ_l⟩`
/// computed on the full state vector.
pub fn pauli_error_expectations(attack: &AttackMatrix, l: usize) -> Result<(f64, f64)> {
    check_slot(attack.n(), l, 2)?;
    let state = filtered_state(attack, l)?;
    let norm = state.norm_sqr();
    let (zz, xx) = state.pauli_pair_expectations(l)?;
    Ok(((norm - zz) / 2.0, (norm - xx) / 2.0))
}
