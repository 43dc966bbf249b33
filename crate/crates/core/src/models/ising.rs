use std::collections::BTreeMap;

use super::ModelError;

/// Ising model over spins `x ∈ {-1, +1}^n` with unnormalized weight
/// `exp(Σ_{i<j} w_ij x_i x_j + Σ_i h_i x_i)`.
///
/// Pairs are stored sparsely with `i < j`; an absent pair has weight 0.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    n: usize,
    pairs: BTreeMap<(usize, usize), f64>,
    fields: Vec<f64>,
}

impl IsingModel {
    /// Pairs may be given in either orientation; each unordered pair at most once.
    pub fn new(
        n: usize,
        pairs: impl IntoIterator<Item = (usize, usize, f64)>,
        fields: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::NoSpins);
        }
        if fields.len() != n {
            return Err(ModelError::Shape(format!(
                "{} fields for {n} spins",
                fields.len()
            )));
        }
        if let Some(i) = fields.iter().position(|h| !h.is_finite()) {
            return Err(ModelError::NonFinite(format!("h[{i}]")));
        }
        let mut map = BTreeMap::new();
        for (i, j, w) in pairs {
            for idx in [i, j] {
                if idx >= n {
                    return Err(ModelError::SpinIndexOutOfRange { index: idx, n });
                }
            }
            if i == j {
                return Err(ModelError::SelfPair(i));
            }
            if !w.is_finite() {
                return Err(ModelError::NonFinite(format!("w[{i},{j}]")));
            }
            let key = (i.min(j), i.max(j));
            if map.insert(key, w).is_some() {
                return Err(ModelError::DuplicatePair(key.0, key.1));
            }
        }
        Ok(Self {
            n,
            pairs: map,
            fields,
        })
    }

    /// `n` independent spins with the given fields.
    pub fn independent(fields: Vec<f64>) -> Result<Self, ModelError> {
        let n = fields.len();
        Self::new(n, std::iter::empty(), fields)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn field(&self, i: usize) -> f64 {
        self.fields[i]
    }

    /// Stored pairs as `((i, j), w)` with `i < j`, in ascending order.
    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.pairs.iter().map(|(&k, &w)| (k, w))
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// Weight of the unordered pair `{i, j}`; 0 when absent.
    pub fn pair_weight(&self, i: usize, j: usize) -> f64 {
        self.pairs.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0)
    }

    /// `W = max |w_ij|` over stored pairs (0 with no pairs).
    pub fn max_abs_pair_weight(&self) -> f64 {
        self.pairs.values().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// `H = max |h_i|`.
    pub fn max_abs_field(&self) -> f64 {
        self.fields.iter().fold(0.0, |m, h| m.max(h.abs()))
    }

    /// Neighbour lists: for each spin, `(other, w)` over its stored pairs.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (&(i, j), &w) in &self.pairs {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        adj
    }

    /// Energy `Σ_{i<j} w_ij x_i x_j + Σ h_i x_i` for spins encoded as a
    /// bitmask, bit `i` set meaning `x_i = +1`.
    pub fn energy_bits(&self, bits: u64) -> f64 {
        let spin = |i: usize| if (bits >> i) & 1 == 1 { 1.0 } else { -1.0 };
        let mut e = 0.0;
        for (&(i, j), &w) in &self.pairs {
            e += w * spin(i) * spin(j);
        }
        for (i, &h) in self.fields.iter().enumerate() {
            e += h * spin(i);
        }
        e
    }

    pub(crate) fn from_raw(n: usize, pairs: BTreeMap<(usize, usize), f64>, fields: Vec<f64>) -> Self {
        debug_assert_eq!(fields.len(), n);
        Self { n, pairs, fields }
    }
}
