//! Border vectors: ordered lists of monomials `h_k f(a, x)` that index the
//! rows and columns of middle matrices.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chips::{left_chip_sets, right_chip_sets};
use crate::error::{Error, Result};
use crate::poly::FreePoly;
use crate::word::{a_words, Generator, Kind, Word};

/// Hard limit on the number of border entries.
pub const BORDER_LIMIT: u128 = 1_000_000;

/// One border monomial `h_k f`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BorderEntry {
    pub k: usize,
    pub f: Word,
}

impl BorderEntry {
    pub fn new(k: usize, f: Word) -> BorderEntry {
        BorderEntry { k, f }
    }

    /// The monomial `h_k f`.
    pub fn word(&self) -> Word {
        self.f.prepend(Generator::h(self.k))
    }

    pub fn x_degree(&self) -> usize {
        self.f.count(Kind::X)
    }
}

impl fmt::Display for BorderEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.word())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    /// All `h_k u₀ x_{i₁} u₁ ⋯ x_{i_j} u_j`, `j ≤ d − 2`.
    Full,
    /// As `Full` with `j ≤ d − 1`.
    Extended,
    /// Chip words of x-degree at most `d − 2`.
    Reduced,
    /// Chip words of x-degree at most `d − 1`.
    ReducedExtended,
    Custom,
}

impl std::str::FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Flavor> {
        match s {
            "full" => Ok(Flavor::Full),
            "extended" => Ok(Flavor::Extended),
            "reduced" => Ok(Flavor::Reduced),
            "reduced_extended" | "reduced-extended" => Ok(Flavor::ReducedExtended),
            _ => Err(Error::Input(format!("unknown border flavor `{s}`"))),
        }
    }
}

/// Entries sorted by x-degree block, then canonical order of `h_k f`.
#[derive(Clone, Debug)]
pub struct Border {
    pub flavor: Flavor,
    entries: Vec<BorderEntry>,
    /// `block_starts[j]..block_starts[j + 1]` is block `j`.
    block_starts: Vec<usize>,
    index: HashMap<BorderEntry, usize>,
}

impl PartialEq for Border {
    fn eq(&self, o: &Border) -> bool {
        self.entries == o.entries
    }
}

/// Size parameters `(d, d̃, g, g̃)` of a polynomial: x-degree, longest a-run,
/// and the number of x and a variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BorderParams {
    pub d: usize,
    pub dtilde: usize,
    pub g: usize,
    pub ga: usize,
}

impl BorderParams {
    pub fn of(p: &FreePoly) -> BorderParams {
        BorderParams {
            d: p.deg_x().max(0) as usize,
            dtilde: p.max_a_run(),
            g: p.max_index(Kind::X),
            ga: p.max_index(Kind::A),
        }
    }

    /// `k_b = Σ_{j=0}^{d̃} g̃^j`, the number of a-words of length at most `d̃`.
    pub fn k_b(&self) -> u128 {
        (0..=self.dtilde as u32).map(|j| (self.ga as u128).pow(j)).sum()
    }

    /// `𝔱_j = (k_b g)^{j+1}`.
    pub fn block_size(&self, j: usize) -> u128 {
        (self.k_b() * self.g as u128).saturating_pow(j as u32 + 1)
    }
}

impl Border {
    /// Sort, deduplicate and index a list of entries.
    pub fn from_entries(flavor: Flavor, entries: impl IntoIterator<Item = BorderEntry>) -> Border {
        let set: BTreeSet<(usize, Word, BorderEntry)> =
            entries.into_iter().map(|e| (e.x_degree(), e.word(), e)).collect();
        let entries: Vec<BorderEntry> = set.into_iter().map(|(_, _, e)| e).collect();
        let nblocks = entries.last().map_or(0, |e| e.x_degree() + 1);
        let mut block_starts = vec![0; nblocks + 1];
        for e in &entries {
            block_starts[e.x_degree() + 1] += 1;
        }
        for j in 0..nblocks {
            block_starts[j + 1] += block_starts[j];
        }
        let index = entries.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        Border { flavor, entries, block_starts, index }
    }

    /// Full border with blocks `0..=max_block`.
    pub fn full_blocks(params: BorderParams, max_block: Option<usize>, flavor: Flavor) -> Result<Border> {
        let Some(max_block) = max_block else {
            return Ok(Border::from_entries(flavor, []));
        };
        let total: u128 = (0..=max_block).map(|j| params.block_size(j)).fold(0u128, |a, b| a.saturating_add(b));
        if total > BORDER_LIMIT {
            return Err(Error::SizeGuard(total, BORDER_LIMIT));
        }
        let b = a_words(params.ga, params.dtilde);
        let mut entries = Vec::with_capacity(total as usize);
        let mut layer: Vec<Word> = b.clone();
        for j in 0..=max_block {
            if j > 0 {
                let mut next = Vec::with_capacity(layer.len() * params.g * b.len());
                for w in &layer {
                    for i in 1..=params.g {
                        for u in &b {
                            let mut nw = w.clone();
                            nw.push(Generator::x(i));
                            next.push(nw.concat(u));
                        }
                    }
                }
                layer = next;
            }
            for k in 1..=params.g {
                for f in &layer {
                    entries.push(BorderEntry::new(k, f.clone()));
                }
            }
        }
        Ok(Border::from_entries(flavor, entries))
    }

    /// Full border `V = (V₀, …, V_{d−2})`.
    pub fn full(params: BorderParams) -> Result<Border> {
        Border::full_blocks(params, params.d.checked_sub(2), Flavor::Full)
    }

    /// Extended full border `Ṽ = (V₀, …, V_{d−1})`.
    pub fn extended(params: BorderParams) -> Result<Border> {
        Border::full_blocks(params, params.d.checked_sub(1), Flavor::Extended)
    }

    /// Chip words `h_k f`, `f ∈ ℛ𝒞_p^k`, of x-degree at most `max_deg`. For a
    /// non-symmetric `p` the transposed left chips are added so that every
    /// row of the Hessian middle matrix is covered.
    pub fn chip_border(p: &FreePoly, max_deg: Option<usize>, flavor: Flavor) -> Border {
        let Some(max_deg) = max_deg else {
            return Border::from_entries(flavor, []);
        };
        let mut entries = Vec::new();
        for (k, words) in &right_chip_sets(p).per_variable {
            for f in words {
                if f.count(Kind::X) <= max_deg {
                    entries.push(BorderEntry::new(*k, f.clone()));
                }
            }
        }
        if !p.is_symmetric() {
            for (k, words) in &left_chip_sets(p).per_variable {
                for u in words {
                    if u.count(Kind::X) <= max_deg {
                        entries.push(BorderEntry::new(*k, u.involution()));
                    }
                }
            }
        }
        Border::from_entries(flavor, entries)
    }

    pub fn reduced(p: &FreePoly) -> Border {
        Border::chip_border(p, (p.deg_x().max(0) as usize).checked_sub(2), Flavor::Reduced)
    }

    /// The reduced extended border `𝔘̃`.
    pub fn reduced_extended(p: &FreePoly) -> Border {
        Border::chip_border(p, (p.deg_x().max(0) as usize).checked_sub(1), Flavor::ReducedExtended)
    }

    pub fn custom(entries: impl IntoIterator<Item = BorderEntry>) -> Border {
        Border::from_entries(Flavor::Custom, entries)
    }

    /// Border of the given flavor for `p`.
    pub fn build(flavor: Flavor, p: &FreePoly) -> Result<Border> {
        match flavor {
            Flavor::Full => Border::full(BorderParams::of(p)),
            Flavor::Extended => Border::extended(BorderParams::of(p)),
            Flavor::Reduced => Ok(Border::reduced(p)),
            Flavor::ReducedExtended => Ok(Border::reduced_extended(p)),
            Flavor::Custom => Err(Error::Input("custom borders are built from explicit entries".into())),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[BorderEntry] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &BorderEntry {
        &self.entries[i]
    }

    pub fn num_blocks(&self) -> usize {
        self.block_starts.len().saturating_sub(1)
    }

    pub fn block_range(&self, j: usize) -> std::ops::Range<usize> {
        if j >= self.num_blocks() {
            return self.entries.len()..self.entries.len();
        }
        self.block_starts[j]..self.block_starts[j + 1]
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        (0..self.num_blocks()).map(|j| self.block_range(j).len()).collect()
    }

    pub fn position(&self, e: &BorderEntry) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn position_of(&self, k: usize, f: &Word) -> Option<usize> {
        self.index.get(&BorderEntry::new(k, f.clone())).copied()
    }

    /// Positions of the entries of `sub` inside `self`.
    pub fn positions_of(&self, sub: &Border) -> Result<Vec<usize>> {
        sub.entries
            .iter()
            .map(|e| self.position(e).ok_or_else(|| Error::UncoveredChip(e.to_string())))
            .collect()
    }

    /// Entries with x-degree at most `j`.
    pub fn truncated(&self, j: usize) -> Border {
        Border::from_entries(self.flavor, self.entries.iter().filter(|e| e.x_degree() <= j).cloned())
    }

    /// `I_κ ⊗ (h_k f)` for each entry, as `κ × κ` polynomials.
    pub fn monomials(&self, kappa: usize) -> Vec<FreePoly> {
        self.entries.iter().map(|e| FreePoly::identity_word(kappa, e.word())).collect()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.to_string()).collect()
    }
}
