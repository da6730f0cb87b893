//! Truncated oscillator bases and interior blocks.
//!
//! Every degree of freedom is represented in the lowest `n_levels` Fock
//! states of a reference oscillator with length scale `ℓ`. The full space is
//! the tensor product over dofs, ordered so that dof 0 is the most
//! significant index (the convention of a left-to-right Kronecker product).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default cap on the storage of a single dense operator: 64 MiB.
pub const DEFAULT_MEMORY_BUDGET: u64 = 64 * 1024 * 1024;

const BYTES_PER_ENTRY: u128 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    n_levels: usize,
    n_dofs: usize,
    hbar: f64,
    masses: Vec<f64>,
    length_scales: Vec<f64>,
    memory_budget: u64,
}

/// Validated constructor with the default memory budget.
pub fn make_basis(
    n_levels: usize,
    n_dofs: usize,
    hbar: f64,
    masses: &[f64],
    length_scales: &[f64],
) -> Result<Arc<BasisSpec>> {
    BasisSpec::with_budget(
        n_levels,
        n_dofs,
        hbar,
        masses,
        length_scales,
        DEFAULT_MEMORY_BUDGET,
    )
}

impl BasisSpec {
    pub fn with_budget(
        n_levels: usize,
        n_dofs: usize,
        hbar: f64,
        masses: &[f64],
        length_scales: &[f64],
        memory_budget: u64,
    ) -> Result<Arc<Self>> {
        if n_levels == 0 {
            return Err(invalid("n_levels", "must be positive"));
        }
        if n_dofs == 0 {
            return Err(invalid("n_dofs", "must be positive"));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(invalid("hbar", format!("must be positive and finite, got {hbar}")));
        }
        check_positive_list("masses", masses, n_dofs)?;
        check_positive_list("length_scales", length_scales, n_dofs)?;

        let dimension = checked_dimension(n_levels, n_dofs)?;
        let bytes = (dimension as u128) * (dimension as u128) * BYTES_PER_ENTRY;
        if bytes > memory_budget as u128 {
            return Err(Error::MemoryBudget {
                dimension,
                bytes,
                budget: memory_budget,
            });
        }
        Ok(Arc::new(Self {
            n_levels,
            n_dofs,
            hbar,
            masses: masses.to_vec(),
            length_scales: length_scales.to_vec(),
            memory_budget,
        }))
    }

    /// Same mass and length scale on every dof.
    pub fn uniform(
        n_levels: usize,
        n_dofs: usize,
        hbar: f64,
        mass: f64,
        length_scale: f64,
    ) -> Result<Arc<Self>> {
        make_basis(
            n_levels,
            n_dofs,
            hbar,
            &vec![mass; n_dofs],
            &vec![length_scale; n_dofs],
        )
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, dof: usize) -> f64 {
        self.masses[dof]
    }

    pub fn length_scales(&self) -> &[f64] {
        &self.length_scales
    }

    pub fn length_scale(&self, dof: usize) -> f64 {
        self.length_scales[dof]
    }

    pub fn memory_budget(&self) -> u64 {
        self.memory_budget
    }

    /// Total Hilbert-space dimension `n_levels ^ n_dofs`.
    pub fn dimension(&self) -> usize {
        self.n_levels.pow(self.n_dofs as u32)
    }

    /// Reference oscillator frequency `ħ / (m ℓ²)` of a dof.
    pub fn omega0(&self, dof: usize) -> f64 {
        self.hbar / (self.masses[dof] * self.length_scales[dof] * self.length_scales[dof])
    }

    pub fn check_dof(&self, dof: usize) -> Result<()> {
        if dof < self.n_dofs {
            Ok(())
        } else {
            Err(Error::DofOutOfRange {
                index: dof,
                n_dofs: self.n_dofs,
            })
        }
    }

    /// The basis restricted to the lowest `m_levels` states per dof.
    pub(crate) fn restricted(&self, m_levels: usize) -> Arc<Self> {
        Arc::new(Self {
            n_levels: m_levels,
            ..self.clone()
        })
    }

    /// Split a flat index into per-dof level indices (dof 0 first).
    pub fn levels_of(&self, mut index: usize) -> Vec<usize> {
        let mut levels = vec![0; self.n_dofs];
        for slot in levels.iter_mut().rev() {
            *slot = index % self.n_levels;
            index /= self.n_levels;
        }
        levels
    }

    /// Inverse of [`BasisSpec::levels_of`].
    pub fn index_of(&self, levels: &[usize]) -> usize {
        levels.iter().fold(0, |acc, &l| acc * self.n_levels + l)
    }
}

fn check_positive_list(name: &'static str, values: &[f64], n_dofs: usize) -> Result<()> {
    if values.len() != n_dofs {
        return Err(invalid(
            name,
            format!("expected {n_dofs} entries, got {}", values.len()),
        ));
    }
    if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(invalid(name, format!("entries must be positive, got {bad}")));
    }
    Ok(())
}

fn checked_dimension(n_levels: usize, n_dofs: usize) -> Result<usize> {
    u32::try_from(n_dofs)
        .ok()
        .and_then(|d| n_levels.checked_pow(d))
        .ok_or(Error::MemoryBudget {
            dimension: usize::MAX,
            bytes: u128::MAX,
            budget: DEFAULT_MEMORY_BUDGET,
        })
}

/// Minimum distance between an identity-test block and the truncation edge.
pub fn safety_margin(max_degree: usize) -> usize {
    max_degree.max(4)
}

/// Keep the lowest `m_levels` basis states of every dof.
///
/// Products of truncated ladder matrices agree with the infinite-dimensional
/// matrix elements as long as no intermediate index reaches the top level, so
/// identities that fail globally in finite dimension hold exactly on such a
/// block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteriorBlock {
    m_levels: usize,
}

impl InteriorBlock {
    /// Any block with at least one level; suitable for plain projection.
    pub fn new(m_levels: usize) -> Result<Self> {
        if m_levels == 0 {
            return Err(Error::InvalidBlock("m_levels must be at least 1".into()));
        }
        Ok(Self { m_levels })
    }

    /// A block admissible for identity tests involving polynomials up to
    /// `max_degree`: `2 ≤ m ≤ n − max(4, max_degree)`.
    pub fn for_identity(basis: &BasisSpec, m_levels: usize, max_degree: usize) -> Result<Self> {
        let margin = safety_margin(max_degree);
        let n = basis.n_levels();
        if m_levels < 2 {
            return Err(Error::InvalidBlock(format!(
                "m_levels = {m_levels} is below the minimum of 2"
            )));
        }
        if m_levels + margin > n {
            return Err(Error::InvalidBlock(format!(
                "m_levels = {m_levels} leaves less than the safety margin {margin} below n_levels = {n}"
            )));
        }
        Ok(Self { m_levels })
    }

    /// `fraction · n_levels`, rounded down, validated for identity tests.
    pub fn from_fraction(basis: &BasisSpec, fraction: f64, max_degree: usize) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::InvalidBlock(format!(
                "interior fraction {fraction} is outside (0, 1]"
            )));
        }
        let m = (fraction * basis.n_levels() as f64).floor() as usize;
        Self::for_identity(basis, m, max_degree)
    }

    pub fn m_levels(&self) -> usize {
        self.m_levels
    }

    pub(crate) fn validate_for(&self, basis: &BasisSpec) -> Result<()> {
        if self.m_levels > basis.n_levels() {
            return Err(Error::InvalidBlock(format!(
                "m_levels = {} exceeds n_levels = {}",
                self.m_levels,
                basis.n_levels()
            )));
        }
        Ok(())
    }
}
