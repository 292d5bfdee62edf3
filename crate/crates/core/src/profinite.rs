//! Profinite integers as coherent residue towers.
//!
//! An element of Ẑ is approximated by its residues along a divisibility chain
//! `M₁ | M₂ | … | M_K`. The default chain is `M_k = lcm(1..k)`, which is
//! cofinal in the divisibility order: every modulus `m` whose prime powers
//! are all `≤ K` divides `M_K`.
//!
//! Integers embedded with [`embed_int`] remember their origin, so their
//! residue modulo any `m` is available regardless of the tower depth. Opaque
//! elements (built from residues) only know what the tower resolves.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{complex_sum, map_indexed, unit, ExecPolicy};
use crate::rationals::{Rational, RationalAngle};

pub const DEFAULT_TOWER_DEPTH: usize = 16;

/// A divisibility chain of moduli.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ModulusTower {
    levels: Arc<[u128]>,
}

impl ModulusTower {
    pub fn new(levels: Vec<u128>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Domain("modulus tower has no levels".into()));
        }
        if levels[0] == 0 {
            return Err(Error::Domain("tower moduli must be positive".into()));
        }
        for w in levels.windows(2) {
            if w[1] % w[0] != 0 {
                return Err(Error::Domain(format!(
                    "tower levels must form a divisibility chain: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self {
            levels: levels.into(),
        })
    }

    /// `M_k = lcm(1..k)` for `k = 1..=depth`.
    ///
    /// Repeated values (`lcm(1..5) = lcm(1..6)`) are kept so that depth `k`
    /// always means every modulus up to `k` is resolved.
    pub fn lcm_tower(depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Domain("tower depth must be at least 1".into()));
        }
        let mut levels = Vec::with_capacity(depth);
        let mut m: u128 = 1;
        for k in 1..=depth as u128 {
            let g = m.gcd(&k);
            m = (m / g)
                .checked_mul(k)
                .ok_or_else(|| Error::Domain(format!("lcm(1..{depth}) overflows 128 bits")))?;
            levels.push(m);
        }
        Ok(Self {
            levels: levels.into(),
        })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// The modulus at 1-based depth `k`.
    pub fn level(&self, k: usize) -> Option<u128> {
        k.checked_sub(1).and_then(|i| self.levels.get(i).copied())
    }

    pub fn levels(&self) -> &[u128] {
        &self.levels
    }

    pub fn top(&self) -> u128 {
        self.levels[self.levels.len() - 1]
    }

    /// First 1-based depth whose modulus is divisible by `m`.
    pub fn resolving_depth(&self, m: u128) -> Option<usize> {
        if m == 0 {
            return None;
        }
        self.levels.iter().position(|&l| l % m == 0).map(|i| i + 1)
    }

    pub fn resolves(&self, m: u128) -> bool {
        self.resolving_depth(m).is_some()
    }

    pub(crate) fn precision_error(&self, m: &BigInt) -> Error {
        Error::Precision {
            modulus: m.to_string(),
            required_depth: required_lcm_depth(m),
        }
    }
}

impl Default for ModulusTower {
    fn default() -> Self {
        Self::lcm_tower(DEFAULT_TOWER_DEPTH).expect("default tower fits")
    }
}

impl fmt::Debug for ModulusTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.levels.iter()).finish()
    }
}

/// Smallest `K` with `m | lcm(1..K)`: the largest prime power dividing `m`.
pub fn required_lcm_depth(m: &BigInt) -> Option<usize> {
    let mut m = m.to_u128()?;
    if m == 0 {
        return None;
    }
    let mut best: u128 = 1;
    let mut p: u128 = 2;
    while p * p <= m {
        if m % p == 0 {
            let mut pe = 1;
            while m % p == 0 {
                m /= p;
                pe *= p;
            }
            best = best.max(pe);
        }
        p += 1;
    }
    best = best.max(m);
    best.to_usize()
}

/// A point of Ẑ, known through its residues along a tower.
#[derive(Clone)]
pub struct ProfiniteInt {
    tower: ModulusTower,
    residues: Vec<u128>,
    origin: Option<BigInt>,
}

impl ProfiniteInt {
    /// Builds an opaque element from residues, checking range and coherence.
    pub fn from_residues(tower: ModulusTower, residues: Vec<u128>) -> Result<Self> {
        if residues.len() != tower.depth() {
            return Err(Error::Domain(format!(
                "expected {} residues, got {}",
                tower.depth(),
                residues.len()
            )));
        }
        for (k, (&r, &m)) in residues.iter().zip(tower.levels()).enumerate() {
            if r >= m {
                return Err(Error::Domain(format!(
                    "residue {r} out of range at depth {} (modulus {m})",
                    k + 1
                )));
            }
        }
        for w in residues.windows(2).zip(tower.levels().windows(2)) {
            let (rs, ms) = w;
            if rs[1] % ms[0] != rs[0] {
                return Err(Error::Domain(format!(
                    "incoherent residues: {} mod {} != {}",
                    rs[1], ms[0], rs[0]
                )));
            }
        }
        Ok(Self {
            tower,
            residues,
            origin: None,
        })
    }

    /// The unique coherent element with residue `r mod M_K` at the top level.
    pub fn from_top_residue(tower: ModulusTower, r: u128) -> Self {
        let r = r % tower.top();
        let residues = tower.levels().iter().map(|&m| r % m).collect();
        Self {
            tower,
            residues,
            origin: None,
        }
    }

    pub fn tower(&self) -> &ModulusTower {
        &self.tower
    }

    pub fn residues(&self) -> &[u128] {
        &self.residues
    }

    /// The integer this element was embedded from, if any.
    pub fn origin(&self) -> Option<&BigInt> {
        self.origin.as_ref()
    }

    /// Residue modulo `m`.
    pub fn residue(&self, m: &BigInt) -> Result<BigInt> {
        if m.is_zero() || m < &BigInt::zero() {
            return Err(Error::Domain(format!("modulus must be positive, got {m}")));
        }
        if let Some(n) = &self.origin {
            return Ok(n.mod_floor(m));
        }
        let small = m.to_u128().ok_or_else(|| self.tower.precision_error(m))?;
        self.residue_u128(small).map(BigInt::from)
    }

    pub fn residue_u128(&self, m: u128) -> Result<u128> {
        if m == 0 {
            return Err(Error::Domain("modulus must be positive, got 0".into()));
        }
        if let Some(n) = &self.origin {
            return Ok(n
                .mod_floor(&BigInt::from(m))
                .to_u128()
                .expect("residue below a u128 modulus"));
        }
        match self.tower.resolving_depth(m) {
            Some(k) => Ok(self.residues[k - 1] % m),
            None => Err(self.tower.precision_error(&BigInt::from(m))),
        }
    }

    /// The integer approximant `t_k ∈ [0, M_k)` with `t_k ≡ t mod M_k`.
    ///
    /// As `k` grows these converge to `t` in the profinite topology.
    pub fn approx_sequence(&self, depth: usize) -> Result<u128> {
        if depth == 0 || depth > self.tower.depth() {
            return Err(Error::Precision {
                modulus: format!("depth {depth}"),
                required_depth: Some(depth.max(1)),
            });
        }
        Ok(self.residues[depth - 1])
    }

    pub fn neg(&self) -> Self {
        Self {
            tower: self.tower.clone(),
            residues: self
                .residues
                .iter()
                .zip(self.tower.levels())
                .map(|(&r, &m)| (m - r) % m)
                .collect(),
            origin: self.origin.as_ref().map(|n| -n),
        }
    }

    /// Levelwise addition, refining to the moduli shared by both towers when
    /// they differ.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.tower == other.tower {
            let residues = self
                .residues
                .iter()
                .zip(&other.residues)
                .zip(self.tower.levels())
                .map(|((&a, &b), &m)| add_mod(a, b, m))
                .collect();
            let origin = match (&self.origin, &other.origin) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            };
            return Ok(Self {
                tower: self.tower.clone(),
                residues,
                origin,
            });
        }
        match (&self.origin, &other.origin) {
            (Some(a), Some(b)) => return Ok(embed_int(&(a + b), &self.tower)),
            (Some(a), None) => return embed_int(a, &other.tower).add(other),
            (None, Some(b)) => return self.add(&embed_int(b, &self.tower)),
            (None, None) => {}
        }
        let theirs: BTreeSet<u128> = other.tower.levels().iter().copied().collect();
        let common: Vec<u128> = self
            .tower
            .levels()
            .iter()
            .copied()
            .filter(|m| theirs.contains(m))
            .collect();
        if common.is_empty() {
            return Err(Error::Domain(format!(
                "towers {:?} and {:?} share no level",
                self.tower, other.tower
            )));
        }
        let residues = common
            .iter()
            .map(|&m| Ok(add_mod(self.residue_u128(m)?, other.residue_u128(m)?, m)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tower: ModulusTower::new(common)?,
            residues,
            origin: None,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Checks `r_j ≡ r_k (mod M_j)` for all `j ≤ k`.
    pub fn is_coherent(&self) -> bool {
        let levels = self.tower.levels();
        self.residues.iter().zip(levels).all(|(&r, &m)| r < m)
            && self
                .residues
                .windows(2)
                .zip(levels.windows(2))
                .all(|(rs, ms)| rs[1] % ms[0] == rs[0])
    }
}

fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    let (s, overflow) = a.overflowing_add(b);
    if overflow || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

/// Equality at every modulus shared by both towers. This is a truncated
/// comparison, not equality in Ẑ.
impl PartialEq for ProfiniteInt {
    fn eq(&self, other: &Self) -> bool {
        if let (Some(a), Some(b)) = (&self.origin, &other.origin) {
            if a == b {
                return true;
            }
        }
        if self.tower == other.tower {
            return self.residues == other.residues;
        }
        self.tower
            .levels()
            .iter()
            .filter(|m| other.tower.levels().contains(m))
            .all(|&m| self.residue_u128(m).ok() == other.residue_u128(m).ok())
    }
}

impl fmt::Debug for ProfiniteInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.origin {
            Some(n) => write!(f, "embed({n})"),
            None => write!(f, "residues{:?} over {:?}", self.residues, self.tower),
        }
    }
}

/// The image of an integer in Ẑ.
pub fn embed_int(n: &BigInt, tower: &ModulusTower) -> ProfiniteInt {
    let residues = tower
        .levels()
        .iter()
        .map(|&m| {
            n.mod_floor(&BigInt::from(m))
                .to_u128()
                .expect("residue below a u128 modulus")
        })
        .collect();
    ProfiniteInt {
        tower: tower.clone(),
        residues,
        origin: Some(n.clone()),
    }
}

pub fn embed_i64(n: i64, tower: &ModulusTower) -> ProfiniteInt {
    embed_int(&BigInt::from(n), tower)
}

/// Normalized Haar average `(1/m) Σ_{r<m} f(r)` of a cylinder function with
/// modulus `m`. Exact for functions factoring through `ℤ/mℤ`.
pub fn haar_average<F>(m: u128, tower: &ModulusTower, policy: ExecPolicy, f: F) -> Result<Complex64>
where
    F: Fn(&ProfiniteInt) -> Complex64 + Sync + Send,
{
    if m == 0 {
        return Err(Error::Domain("cylinder modulus must be positive".into()));
    }
    if !tower.resolves(m) {
        return Err(tower.precision_error(&BigInt::from(m)));
    }
    let n = usize::try_from(m).map_err(|_| Error::Domain(format!("modulus {m} too large to enumerate")))?;
    let values = map_indexed(policy, n, |r| f(&embed_int(&BigInt::from(r), tower)));
    Ok(complex_sum(values) / m as f64)
}

/// Haar mean of the character `χ_θ` of Ẑ.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterMean {
    /// Exact value from phase-class accounting: 1 for the trivial character,
    /// 0 otherwise.
    pub exact: Rational,
    /// Floating-point cylinder average.
    pub value: Complex64,
}

/// Averages `χ_θ(t) = exp(2πi·a·t/b)` over Ẑ.
///
/// The exact part counts how often each phase class `a·r mod b` occurs as
/// `r` runs over `ℤ/bℤ`: with `g = gcd(a, b)` every multiple of `g` occurs
/// exactly `g` times, so the sum is `b` when `g = b` (θ = 0) and a full
/// cancelling orbit of roots of unity otherwise.
pub fn character_mean(theta: &RationalAngle) -> Result<CharacterMean> {
    let b = theta
        .b()
        .to_u128()
        .ok_or_else(|| Error::Domain(format!("denominator {} too large", theta.b())))?;
    let a = theta.a().to_u128().expect("a < b");
    let exact = exact_phase_mean(a, b);
    let n = usize::try_from(b).map_err(|_| Error::Domain(format!("modulus {b} too large to enumerate")))?;
    let value = complex_sum((0..n).map(|r| unit(((a * r as u128) % b) as f64 / b as f64))) / b as f64;
    Ok(CharacterMean { exact, value })
}

fn exact_phase_mean(a: u128, b: u128) -> Rational {
    let g = a.gcd(&b);
    let orbit = b / g;
    if orbit == 1 {
        Rational::from_integer(1)
    } else {
        Rational::zero()
    }
}

/// Memoized [`character_mean`] for sweeps over many angles.
///
/// For reduced `a/b` the map `r ↦ a·r mod b` permutes `ℤ/bℤ`, so the float
/// average depends only on `b`; it is summed once per denominator in the
/// canonical order `k = 0..b`.
#[derive(Debug, Default)]
pub struct CharacterMeanTable {
    by_denominator: std::collections::HashMap<u128, Complex64>,
}

impl CharacterMeanTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mean(&mut self, theta: &RationalAngle) -> Result<CharacterMean> {
        let b = theta
            .b()
            .to_u128()
            .ok_or_else(|| Error::Domain(format!("denominator {} too large", theta.b())))?;
        let a = theta.a().to_u128().expect("a < b");
        Ok(self.reduced(a, b))
    }

    /// Haar mean of `χ_ϱ·χ̄_σ`, i.e. of `χ_{ϱ−σ}`, with the difference
    /// formed in machine words when both denominators fit in `u64`.
    pub fn pair_mean(&mut self, rho: &RationalAngle, sigma: &RationalAngle) -> Result<CharacterMean> {
        let small = |x: &BigInt| x.to_u64().map(u128::from);
        match (small(rho.a()), small(rho.b()), small(sigma.a()), small(sigma.b())) {
            (Some(a1), Some(b1), Some(a2), Some(b2)) => {
                let d = b1 * b2;
                let n = (a1 * b2 + d - a2 * b1) % d;
                let g = n.gcd(&d);
                Ok(self.reduced(n / g, d / g))
            }
            _ => self.mean(&rho.sub(sigma)),
        }
    }

    fn reduced(&mut self, a: u128, b: u128) -> CharacterMean {
        let value = *self.by_denominator.entry(b).or_insert_with(|| {
            complex_sum((0..b).map(|k| unit(k as f64 / b as f64))) / b as f64
        });
        CharacterMean {
            exact: exact_phase_mean(a, b),
            value,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfiniteJson {
    Int {
        #[serde(with = "crate::rationals::bigint_json")]
        int: BigInt,
    },
    Residues {
        moduli: Vec<u64>,
        residues: Vec<u64>,
    },
}

impl ProfiniteJson {
    /// Expands against the session tower; residue towers carry their own.
    pub fn into_profinite(self, session: &ModulusTower) -> Result<ProfiniteInt> {
        match self {
            ProfiniteJson::Int { int } => Ok(embed_int(&int, session)),
            ProfiniteJson::Residues { moduli, residues } => {
                let widen = |v: Vec<u64>| v.into_iter().map(u128::from).collect::<Vec<_>>();
                ProfiniteInt::from_residues(ModulusTower::new(widen(moduli))?, widen(residues))
            }
        }
    }

    /// Fails for towers whose moduli exceed 64 bits.
    pub fn from_profinite(t: &ProfiniteInt) -> Result<Self> {
        let narrow = |v: &[u128]| {
            v.iter()
                .map(|&x| u64::try_from(x).map_err(|_| Error::Domain(format!("{x} exceeds 64 bits"))))
                .collect::<Result<Vec<_>>>()
        };
        Ok(match t.origin() {
            Some(n) => ProfiniteJson::Int { int: n.clone() },
            None => ProfiniteJson::Residues {
                moduli: narrow(t.tower().levels())?,
                residues: narrow(t.residues())?,
            },
        })
    }
}
