//! Sherrington-Kirkpatrick instances and single-spin-flip energy algebra.
//!
//! The Hamiltonian is `H(J, s) = -1/2 * sum_{i,j} J_ij s_i s_j` with a
//! symmetric, zero-diagonal Gaussian coupling matrix of variance `1/n`.
//! [`DynamicsState`] keeps the local fields `h_i = sum_{j != i} J_ij s_j`
//! up to date so that a flip costs `O(n)`.

use std::fmt;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifies the `(n, seed) -> matrix` mapping of [`generate_couplings`].
///
/// ChaCha8 seeded with `seed_from_u64(seed)`, ziggurat standard normals from
/// `rand_distr::StandardNormal`, drawn row by row over the strict upper
/// triangle and scaled by `1/sqrt(n)`.
pub const GENERATOR_VERSION: &str = "chacha8-ziggurat-upper-rowmajor/1";

/// Dense symmetric coupling matrix with zero diagonal.
///
/// Both triangles are stored; the upper triangle is written first and the
/// lower triangle is a bit-exact mirror of it.
#[derive(Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl CouplingMatrix {
    /// Builds a matrix from its strict upper triangle in row-major order
    /// (`(0,1), (0,2), ..., (0,n-1), (1,2), ...`).
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("instance size must be at least 1"));
        }
        let expected = n * (n - 1) / 2;
        if upper.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: upper.len(),
            });
        }
        if let Some(bad) = upper.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite coupling {bad}")));
        }
        let mut entries = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                entries[i * n + j] = upper[k];
                entries[j * n + i] = upper[k];
                k += 1;
            }
        }
        Ok(CouplingMatrix { n, entries })
    }

    /// Builds a matrix from full rows, checking symmetry and the zero diagonal.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("instance size must be at least 1"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if row[i] != 0.0 {
                return Err(Error::invalid(format!(
                    "diagonal entry ({i},{i}) is not zero"
                )));
            }
            for j in (i + 1)..n {
                if row[j] != rows[j][i] {
                    return Err(Error::invalid(format!(
                        "couplings ({i},{j}) and ({j},{i}) differ"
                    )));
                }
            }
        }
        let upper: Vec<f64> = (0..n)
            .flat_map(|i| rows[i][(i + 1)..].iter().copied())
            .collect();
        Self::from_upper(n, &upper)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Iterates the strict upper triangle in row-major order.
    pub fn upper(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).flat_map(move |i| self.row(i)[(i + 1)..].iter().copied())
    }
}

impl fmt::Debug for CouplingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CouplingMatrix")
            .field("n", &self.n)
            .finish_non_exhaustive()
    }
}

/// A configuration of `n` Ising spins, each exactly `-1` or `+1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.is_empty() {
            return Err(Error::invalid("spin configuration must not be empty"));
        }
        if let Some(pos) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::invalid(format!(
                "spin {pos} is {}, expected -1 or +1",
                spins[pos]
            )));
        }
        Ok(SpinConfig(spins))
    }

    pub fn all_up(n: usize) -> Self {
        SpinConfig(vec![1; n.max(1)])
    }

    /// Bit `i` of `bits` set means spin `i` is `+1`.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        debug_assert!((1..=64).contains(&n));
        SpinConfig(
            (0..n)
                .map(|i| if bits >> i & 1 == 1 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    #[inline]
    pub fn spin(&self, i: usize) -> f64 {
        self.0[i] as f64
    }

    /// The globally flipped configuration `-s`.
    pub fn negated(&self) -> Self {
        SpinConfig(self.0.iter().map(|&s| -s).collect())
    }

    /// Copy with spin `k` reversed.
    pub fn flipped(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.0[k] = -out.0[k];
        out
    }

    pub(crate) fn flip_in_place(&mut self, k: usize) {
        self.0[k] = -self.0[k];
    }
}

impl TryFrom<Vec<i8>> for SpinConfig {
    type Error = Error;

    fn try_from(v: Vec<i8>) -> Result<Self> {
        SpinConfig::new(v)
    }
}

impl From<SpinConfig> for Vec<i8> {
    fn from(s: SpinConfig) -> Self {
        s.0
    }
}

/// Spins plus incrementally maintained local fields, energy and flip count.
#[derive(Clone, Debug)]
pub struct DynamicsState {
    spins: SpinConfig,
    local_fields: Vec<f64>,
    energy: f64,
    flips: u64,
}

impl DynamicsState {
    pub fn spins(&self) -> &SpinConfig {
        &self.spins
    }

    pub fn local_fields(&self) -> &[f64] {
        &self.local_fields
    }

    /// Total energy `H`, not divided by `n`.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn flips(&self) -> u64 {
        self.flips
    }

    pub fn n(&self) -> usize {
        self.spins.len()
    }

    /// `s_k * h_k`; the energy change of flipping `k` is twice this.
    #[inline]
    pub fn delta(&self, k: usize) -> f64 {
        self.spins.spin(k) * self.local_fields[k]
    }

    /// Reverses spin `k` in `O(n)`.
    pub fn apply_flip(&mut self, couplings: &CouplingMatrix, k: usize) -> Result<()> {
        let n = self.n();
        if couplings.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: couplings.n(),
            });
        }
        if k >= n {
            return Err(Error::invalid(format!("site {k} out of range for n = {n}")));
        }
        self.flip_unchecked(couplings, k);
        Ok(())
    }

    #[inline]
    pub(crate) fn flip_unchecked(&mut self, couplings: &CouplingMatrix, k: usize) {
        let old = self.spins.spin(k);
        self.energy += 2.0 * old * self.local_fields[k];
        // J_kk == 0 leaves h_k untouched.
        let scale = 2.0 * old;
        for (h, &j) in self.local_fields.iter_mut().zip(couplings.row(k)) {
            *h -= scale * j;
        }
        self.spins.flip_in_place(k);
        self.flips += 1;
    }

    /// Recomputes fields and energy from scratch, keeping the flip count.
    pub fn reanchor(&mut self, couplings: &CouplingMatrix) {
        self.local_fields = local_fields(couplings, &self.spins);
        self.energy = energy_from_fields(&self.spins, &self.local_fields);
    }
}

fn check_dims(couplings: &CouplingMatrix, sigma: &SpinConfig) -> Result<()> {
    if couplings.n() != sigma.len() {
        return Err(Error::DimensionMismatch {
            expected: couplings.n(),
            found: sigma.len(),
        });
    }
    Ok(())
}

fn local_fields(couplings: &CouplingMatrix, sigma: &SpinConfig) -> Vec<f64> {
    (0..couplings.n())
        .map(|i| {
            couplings
                .row(i)
                .iter()
                .zip(sigma.as_slice())
                .map(|(&j, &s)| j * s as f64)
                .sum()
        })
        .collect()
}

fn energy_from_fields(sigma: &SpinConfig, fields: &[f64]) -> f64 {
    -0.5 * sigma
        .as_slice()
        .iter()
        .zip(fields)
        .map(|(&s, &h)| s as f64 * h)
        .sum::<f64>()
}

/// Draws an SK instance: upper-triangle entries i.i.d. `N(0, 1/n)`.
///
/// Pure function of `(n, seed)`; see [`GENERATOR_VERSION`].
pub fn generate_couplings(n: usize, seed: u64) -> Result<CouplingMatrix> {
    if n == 0 {
        return Err(Error::invalid("instance size must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (n as f64).sqrt();
    let upper: Vec<f64> = (0..n * (n - 1) / 2)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    CouplingMatrix::from_upper(n, &upper)
}

/// Total energy by the full double sum.
pub fn energy(couplings: &CouplingMatrix, sigma: &SpinConfig) -> Result<f64> {
    check_dims(couplings, sigma)?;
    let n = couplings.n();
    let mut acc = 0.0;
    for i in 0..n {
        let si = sigma.spin(i);
        for j in 0..n {
            acc += couplings.get(i, j) * si * sigma.spin(j);
        }
    }
    Ok(-0.5 * acc)
}

pub fn init_state(couplings: &CouplingMatrix, sigma: &SpinConfig) -> Result<DynamicsState> {
    check_dims(couplings, sigma)?;
    let local_fields = local_fields(couplings, sigma);
    let energy = energy_from_fields(sigma, &local_fields);
    Ok(DynamicsState {
        spins: sigma.clone(),
        local_fields,
        energy,
        flips: 0,
    })
}

/// Functional form of [`DynamicsState::apply_flip`].
pub fn apply_flip(
    mut state: DynamicsState,
    couplings: &CouplingMatrix,
    k: usize,
) -> Result<DynamicsState> {
    state.apply_flip(couplings, k)?;
    Ok(state)
}

/// The per-site quantities `dE_i = s_i * h_i`.
pub fn delta_spectrum(state: &DynamicsState) -> Vec<f64> {
    (0..state.n()).map(|i| state.delta(i)).collect()
}

/// Stored form of an instance: its identity plus, optionally, the matrix.
#[derive(Clone, Debug)]
pub struct InstanceFile {
    pub n: usize,
    pub seed: u64,
    pub generator_version: String,
    pub matrix: Option<CouplingMatrix>,
}

impl InstanceFile {
    pub fn new(n: usize, seed: u64, with_matrix: bool) -> Result<Self> {
        let matrix = if with_matrix {
            Some(generate_couplings(n, seed)?)
        } else {
            None
        };
        Ok(InstanceFile {
            n,
            seed,
            generator_version: GENERATOR_VERSION.to_string(),
            matrix,
        })
    }

    /// Returns the stored matrix, or regenerates it when only the identity
    /// was saved. Regeneration refuses a foreign generator version.
    pub fn couplings(&self) -> Result<CouplingMatrix> {
        match &self.matrix {
            Some(m) => Ok(m.clone()),
            None if self.generator_version == GENERATOR_VERSION => {
                generate_couplings(self.n, self.seed)
            }
            None => Err(Error::Parse(format!(
                "instance was produced by generator `{}`, this build has `{}`",
                self.generator_version, GENERATOR_VERSION
            ))),
        }
    }

    /// Line-oriented text format:
    ///
    /// ```text
    /// skdescent-instance 1
    /// generator <version>
    /// n <n>
    /// seed <seed>
    /// upper            (optional; followed by n-1 lines of the strict upper triangle)
    /// ```
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "skdescent-instance 1")?;
        writeln!(w, "generator {}", self.generator_version)?;
        writeln!(w, "n {}", self.n)?;
        writeln!(w, "seed {}", self.seed)?;
        if let Some(m) = &self.matrix {
            writeln!(w, "upper")?;
            for i in 0..m.n().saturating_sub(1) {
                let line: Vec<String> = m.row(i)[(i + 1)..]
                    .iter()
                    .map(|v| format!("{v:?}"))
                    .collect();
                writeln!(w, "{}", line.join(" "))?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .transpose()?
                .ok_or_else(|| Error::Parse(format!("unexpected end of file, expected {what}")))
        };
        let magic = next("header")?;
        if magic.trim() != "skdescent-instance 1" {
            return Err(Error::Parse(format!("unrecognized header `{magic}`")));
        }
        let field = |line: String, key: &str| -> Result<String> {
            line.trim()
                .strip_prefix(key)
                .map(|v| v.trim().to_string())
                .ok_or_else(|| Error::Parse(format!("expected `{key}`, found `{line}`")))
        };
        let generator_version = field(next("generator")?, "generator")?;
        let n: usize = field(next("n")?, "n")?
            .parse()
            .map_err(|e| Error::Parse(format!("n: {e}")))?;
        let seed: u64 = field(next("seed")?, "seed")?
            .parse()
            .map_err(|e| Error::Parse(format!("seed: {e}")))?;
        let matrix = match lines.next().transpose()? {
            Some(l) if l.trim() == "upper" => {
                let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
                for i in 0..n.saturating_sub(1) {
                    let line = lines
                        .next()
                        .transpose()?
                        .ok_or_else(|| Error::Parse(format!("missing matrix row {i}")))?;
                    for tok in line.split_whitespace() {
                        upper.push(
                            tok.parse::<f64>()
                                .map_err(|e| Error::Parse(format!("row {i}: {e}")))?,
                        );
                    }
                }
                Some(CouplingMatrix::from_upper(n, &upper)?)
            }
            Some(l) if l.trim().is_empty() => None,
            Some(l) => return Err(Error::Parse(format!("unexpected line `{l}`"))),
            None => None,
        };
        if n == 0 {
            return Err(Error::Parse("n must be at least 1".into()));
        }
        Ok(InstanceFile {
            n,
            seed,
            generator_version,
            matrix,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::Stream;
    use rand::Rng;

    fn pair() -> CouplingMatrix {
        CouplingMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn spins(v: &[i8]) -> SpinConfig {
        SpinConfig::new(v.to_vec()).unwrap()
    }

    fn random_spins(n: usize, rng: &mut impl Rng) -> SpinConfig {
        SpinConfig::new(
            (0..n)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect(),
        )
        .unwrap()
    }

    // Independent oracle: h_i by explicit loop skipping j == i.
    fn direct_field(j: &CouplingMatrix, s: &SpinConfig, i: usize) -> f64 {
        let mut acc = 0.0;
        for k in 0..j.n() {
            if k != i {
                acc += j.get(i, k) * s.spin(k);
            }
        }
        acc
    }

    #[test]
    fn generate_single_site() {
        let m = generate_couplings(1, 123).unwrap();
        assert_eq!(m.n(), 1);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn generate_rejects_zero() {
        assert!(matches!(
            generate_couplings(0, 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn generate_is_deterministic() {
        let a = generate_couplings(5, 7).unwrap();
        let b = generate_couplings(5, 7).unwrap();
        assert!(a == b);
        assert!(a != generate_couplings(5, 8).unwrap());
    }

    #[test]
    fn generated_matrix_is_symmetric_with_zero_diagonal() {
        let m = generate_couplings(40, 11).unwrap();
        for i in 0..40 {
            assert_eq!(m.get(i, i).to_bits(), 0.0f64.to_bits());
            for j in 0..40 {
                assert_eq!(m.get(i, j).to_bits(), m.get(j, i).to_bits());
            }
        }
    }

    #[test]
    fn generated_variance_matches_one_over_n() {
        let n = 2000;
        let m = generate_couplings(n, 3).unwrap();
        let vals: Vec<f64> = m.upper().collect();
        assert_eq!(vals.len(), n * (n - 1) / 2);
        let count = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / count;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
        let target = 1.0 / n as f64;
        assert!(var >= 0.95 * target && var <= 1.05 * target, "var = {var}");
        // mean has stderr sqrt(1/n / count) ~ 1.6e-5
        assert!(mean.abs() < 1e-4, "mean = {mean}");
    }

    #[test]
    fn energy_hand_values() {
        let j = pair();
        assert_eq!(energy(&j, &spins(&[1, 1])).unwrap(), -1.0);
        assert_eq!(energy(&j, &spins(&[1, -1])).unwrap(), 1.0);
    }

    #[test]
    fn energy_dimension_mismatch() {
        let j = pair();
        assert!(matches!(
            energy(&j, &spins(&[1, 1, 1])),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        ));
        assert!(init_state(&j, &spins(&[1])).is_err());
    }

    #[test]
    fn energy_global_flip_symmetry() {
        let j = generate_couplings(17, 5).unwrap();
        let mut rng = Stream::new(1);
        for _ in 0..20 {
            let s = random_spins(17, &mut rng);
            assert_eq!(energy(&j, &s).unwrap(), energy(&j, &s.negated()).unwrap());
        }
    }

    #[test]
    fn init_state_hand_values() {
        let st = init_state(&pair(), &spins(&[1, -1])).unwrap();
        assert_eq!(st.local_fields(), &[-1.0, 1.0]);
        assert_eq!(st.energy(), 1.0);
        assert_eq!(st.flips(), 0);

        let one = CouplingMatrix::from_rows(&[vec![0.0]]).unwrap();
        let st = init_state(&one, &spins(&[1])).unwrap();
        assert_eq!(st.local_fields(), &[0.0]);
        assert_eq!(st.energy(), 0.0);
    }

    #[test]
    fn init_state_matches_recomputation() {
        let j = generate_couplings(50, 21).unwrap();
        let mut rng = Stream::new(2);
        let s = random_spins(50, &mut rng);
        let st = init_state(&j, &s).unwrap();
        for i in 0..50 {
            assert!((st.local_fields()[i] - direct_field(&j, &s, i)).abs() <= 1e-9);
        }
        assert!((st.energy() - energy(&j, &s).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn delta_spectrum_hand_values() {
        let st = init_state(&pair(), &spins(&[1, 1])).unwrap();
        assert_eq!(delta_spectrum(&st), vec![1.0, 1.0]);
        let st = init_state(&pair(), &spins(&[1, -1])).unwrap();
        assert_eq!(delta_spectrum(&st), vec![-1.0, -1.0]);
    }

    #[test]
    fn flip_energy_change_is_twice_delta() {
        let j = generate_couplings(30, 4).unwrap();
        let mut rng = Stream::new(3);
        let s = random_spins(30, &mut rng);
        let st = init_state(&j, &s).unwrap();
        let before = energy(&j, &s).unwrap();
        for (i, d) in delta_spectrum(&st).into_iter().enumerate() {
            let after = energy(&j, &s.flipped(i)).unwrap();
            assert!((after - before - 2.0 * d).abs() <= 1e-9);
        }
    }

    #[test]
    fn flip_change_exhaustive_small() {
        for n in 1..=12usize {
            let j = generate_couplings(n, 100 + n as u64).unwrap();
            for bits in 0..(1u64 << n) {
                let s = SpinConfig::from_bits(n, bits);
                let st = init_state(&j, &s).unwrap();
                let e0 = energy(&j, &s).unwrap();
                for i in 0..n {
                    let e1 = energy(&j, &s.flipped(i)).unwrap();
                    assert!((e1 - e0 - 2.0 * st.delta(i)).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn apply_flip_hand_values() {
        let j = pair();
        let mut st = init_state(&j, &spins(&[1, -1])).unwrap();
        st.apply_flip(&j, 0).unwrap();
        assert_eq!(st.spins().as_slice(), &[-1, -1]);
        assert_eq!(st.energy(), -1.0);
        assert_eq!(st.flips(), 1);
        assert!(st.apply_flip(&j, 2).is_err());
    }

    #[test]
    fn apply_flip_is_an_involution() {
        let j = generate_couplings(25, 8).unwrap();
        let mut rng = Stream::new(4);
        let s = random_spins(25, &mut rng);
        let st0 = init_state(&j, &s).unwrap();
        for k in 0..25 {
            let mut st = st0.clone();
            st.apply_flip(&j, k).unwrap();
            st.apply_flip(&j, k).unwrap();
            assert_eq!(st.spins(), st0.spins());
            assert!((st.energy() - st0.energy()).abs() <= 1e-9);
            assert_eq!(st.flips(), 2);
        }
    }

    #[test]
    fn random_flips_track_full_recomputation() {
        let n = 100;
        let j = generate_couplings(n, 9).unwrap();
        let mut rng = Stream::new(5);
        let s = random_spins(n, &mut rng);
        let mut st = init_state(&j, &s).unwrap();
        for _ in 0..10_000 {
            let k = rng.random_range(0..n);
            st.apply_flip(&j, k).unwrap();
        }
        let exact = energy(&j, st.spins()).unwrap();
        assert!((st.energy() - exact).abs() <= 1e-6);
        for i in 0..n {
            assert!((st.local_fields()[i] - direct_field(&j, st.spins(), i)).abs() <= 1e-6);
        }
        st.reanchor(&j);
        assert!((st.energy() - exact).abs() <= 1e-12);
    }

    #[test]
    fn spin_config_validation() {
        assert!(SpinConfig::new(vec![]).is_err());
        assert!(SpinConfig::new(vec![1, 0]).is_err());
        assert!(SpinConfig::new(vec![1, 2]).is_err());
        let s: SpinConfig = serde_json::from_str("[1,-1,1]").unwrap();
        assert_eq!(s.len(), 3);
        assert!(serde_json::from_str::<SpinConfig>("[1,3]").is_err());
    }

    #[test]
    fn from_rows_validation() {
        assert!(CouplingMatrix::from_rows(&[vec![0.0, 1.0], vec![0.5, 0.0]]).is_err());
        assert!(CouplingMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(CouplingMatrix::from_rows(&[vec![0.0, 1.0]]).is_err());
        assert!(CouplingMatrix::from_upper(3, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn instance_file_round_trip() {
        let inst = InstanceFile::new(6, 77, true).unwrap();
        let mut buf = Vec::new();
        inst.write_to(&mut buf).unwrap();
        let back = InstanceFile::read_from(&buf[..]).unwrap();
        assert_eq!(back.n, 6);
        assert_eq!(back.seed, 77);
        assert!(back.couplings().unwrap() == generate_couplings(6, 77).unwrap());

        let ident = InstanceFile::new(6, 77, false).unwrap();
        let mut buf = Vec::new();
        ident.write_to(&mut buf).unwrap();
        let back = InstanceFile::read_from(&buf[..]).unwrap();
        assert!(back.matrix.is_none());
        assert!(back.couplings().unwrap() == generate_couplings(6, 77).unwrap());

        let mut foreign = back.clone();
        foreign.generator_version = "other/0".into();
        assert!(foreign.couplings().is_err());
    }
}
