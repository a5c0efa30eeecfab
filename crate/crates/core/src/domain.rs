//! Named variables with ordered, named states.
//!
//! A [`Domain`] fixes the row order of every table defined over it and the
//! mapping between state names and integer levels. Levels are 1-based in all
//! public interfaces; storage is 0-based.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    labels: Vec<String>,
    states: Vec<Vec<String>>,
}

impl Domain {
    /// Build a domain from `(label, states)` pairs.
    ///
    /// Labels must be unique and non-empty, and each label needs at least one
    /// uniquely named state. An empty pair list is the scalar domain.
    pub fn new<L, S>(pairs: Vec<(L, Vec<S>)>) -> Result<Self>
    where
        L: Into<String>,
        S: Into<String>,
    {
        let mut labels = Vec::with_capacity(pairs.len());
        let mut states = Vec::with_capacity(pairs.len());
        for (label, sts) in pairs {
            let label: String = label.into();
            if label.is_empty() {
                return Err(Error::InvalidDomain("empty variable name".into()));
            }
            if labels.contains(&label) {
                return Err(Error::InvalidDomain(format!("duplicate variable '{label}'")));
            }
            if sts.is_empty() {
                return Err(Error::InvalidDomain(format!("variable '{label}' has no states")));
            }
            let sts: Vec<String> = sts.into_iter().map(Into::into).collect();
            for (i, s) in sts.iter().enumerate() {
                if sts[..i].contains(s) {
                    return Err(Error::InvalidDomain(format!(
                        "duplicate state '{s}' for variable '{label}'"
                    )));
                }
            }
            labels.push(label);
            states.push(sts);
        }
        Ok(Domain { labels, states })
    }

    /// The scalar domain: no variables, exactly one (empty) cell.
    pub fn scalar() -> Self {
        Domain { labels: Vec::new(), states: Vec::new() }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of variables.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.label_index(label).is_some()
    }

    /// State names of the variable at `idx`.
    pub fn states(&self, idx: usize) -> &[String] {
        &self.states[idx]
    }

    pub fn states_of(&self, label: &str) -> Result<&[String]> {
        let idx = self
            .label_index(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        Ok(&self.states[idx])
    }

    /// Cardinality of the variable at `idx`.
    pub fn cardinality(&self, idx: usize) -> usize {
        self.states[idx].len()
    }

    /// 0-based level of `state` for the variable at `idx`.
    pub(crate) fn level_of(&self, idx: usize, state: &str) -> Result<u32> {
        self.states[idx]
            .iter()
            .position(|s| s == state)
            .map(|p| p as u32)
            .ok_or_else(|| Error::UnknownState {
                label: self.labels[idx].clone(),
                state: state.to_string(),
            })
    }

    /// Total number of dense cells, checked for 64-bit overflow.
    pub fn statespace_size(&self) -> Result<u64> {
        let mut n: u64 = 1;
        for sts in &self.states {
            n = n
                .checked_mul(sts.len() as u64)
                .ok_or_else(|| Error::Capacity("dense cell count exceeds u64".into()))?;
        }
        Ok(n)
    }

    /// Dense cell count as a float; never overflows for realistic domains.
    pub fn statespace_size_f64(&self) -> f64 {
        self.states.iter().map(|s| s.len() as f64).product()
    }

    /// Union domain for products: `self`'s variables first, then the
    /// variables of `other` not already present. Shared variables must have
    /// identical state lists.
    pub fn union(&self, other: &Domain) -> Result<Domain> {
        let mut labels = self.labels.clone();
        let mut states = self.states.clone();
        for (i, label) in other.labels.iter().enumerate() {
            match self.label_index(label) {
                Some(j) => {
                    if self.states[j] != other.states[i] {
                        return Err(Error::DomainConflict {
                            label: label.clone(),
                            detail: "state lists differ".into(),
                        });
                    }
                }
                None => {
                    labels.push(label.clone());
                    states.push(other.states[i].clone());
                }
            }
        }
        Ok(Domain { labels, states })
    }

    /// Check that every variable shared with `other` has an identical state list.
    pub fn check_compatible(&self, other: &Domain) -> Result<()> {
        for (i, label) in other.labels.iter().enumerate() {
            if let Some(j) = self.label_index(label) {
                if self.states[j] != other.states[i] {
                    return Err(Error::DomainConflict {
                        label: label.clone(),
                        detail: "state lists differ".into(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Sub-domain over `keep` (slice of indices into this domain), preserving
    /// the given order.
    pub(crate) fn project(&self, keep: &[usize]) -> Domain {
        Domain {
            labels: keep.iter().map(|&i| self.labels[i].clone()).collect(),
            states: keep.iter().map(|&i| self.states[i].clone()).collect(),
        }
    }

    /// Strides for the dense linearization: the first listed variable varies
    /// fastest.
    pub(crate) fn strides(&self) -> Vec<u64> {
        let mut strides = Vec::with_capacity(self.len());
        let mut acc: u64 = 1;
        for sts in &self.states {
            strides.push(acc);
            acc = acc.saturating_mul(sts.len() as u64);
        }
        strides
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xyz() -> Domain {
        Domain::new(vec![
            ("X", vec!["x1", "x2"]),
            ("Y", vec!["y1", "y2"]),
            ("Z", vec!["z1", "z2"]),
        ])
        .unwrap()
    }

    #[test]
    fn basic_construction() {
        let d = xyz();
        assert_eq!(d.len(), 3);
        assert_eq!(d.statespace_size().unwrap(), 8);
        assert_eq!(d.label_index("Y"), Some(1));
        assert_eq!(d.level_of(1, "y2").unwrap(), 1);
    }

    #[test]
    fn rejects_duplicates_and_empties() {
        assert!(Domain::new(vec![("X", vec!["a"]), ("X", vec!["b"])]).is_err());
        assert!(Domain::new(vec![("X", Vec::<&str>::new())]).is_err());
        assert!(Domain::new(vec![("X", vec!["a", "a"])]).is_err());
        assert!(Domain::new(vec![("", vec!["a"])]).is_err());
    }

    #[test]
    fn union_orders_left_first() {
        let a = xyz();
        let b = Domain::new(vec![
            ("Y", vec!["y1", "y2"]),
            ("Z", vec!["z1", "z2"]),
            ("W", vec!["w1", "w2"]),
        ])
        .unwrap();
        let u = a.union(&b).unwrap();
        assert_eq!(u.labels(), ["X", "Y", "Z", "W"]);
    }

    #[test]
    fn union_rejects_state_conflicts() {
        let a = Domain::new(vec![("X", vec!["x1", "x2"])]).unwrap();
        let b = Domain::new(vec![("X", vec!["x2", "x1"])]).unwrap();
        assert!(matches!(a.union(&b), Err(Error::DomainConflict { .. })));
    }

    #[test]
    fn scalar_domain_has_one_cell() {
        let d = Domain::scalar();
        assert_eq!(d.statespace_size().unwrap(), 1);
        assert!(d.is_empty());
    }
}
