//! Bayesian network specification: one conditional probability table per
//! variable plus the directed structure, validated for consistency.

use indexmap::IndexMap;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::sparse::SparseTable;

/// Tolerance for conditional tables summing to one.
const CPT_TOL: f64 = 1e-9;

/// A validated Bayesian network.
///
/// `cpts[i]` is the table of the i-th variable, defined over the child
/// followed by its parents; conditioned on any parent configuration with
/// non-zero mass it sums to one.
#[derive(Debug, Clone)]
pub struct NetworkSpec {
    domain: Domain,
    dag: Dag,
    cpts: Vec<SparseTable>,
}

impl NetworkSpec {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn cpts(&self) -> &[SparseTable] {
        &self.cpts
    }

    pub fn n_vars(&self) -> usize {
        self.domain.len()
    }

    /// The factorization as display strings, one per variable:
    /// `P( child )` or `P( child | parent, parent )`.
    pub fn factorization(&self) -> Vec<String> {
        self.dag
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, child)| {
                let parents = self.dag.parents(i);
                if parents.is_empty() {
                    format!("P( {child} )")
                } else {
                    let ps: Vec<&str> =
                        parents.iter().map(|&p| self.dag.nodes()[p].as_str()).collect();
                    format!("P( {child} | {} )", ps.join(", "))
                }
            })
            .collect()
    }
}

impl std::fmt::Display for NetworkSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for line in self.factorization() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Validate a list of conditional tables into a network.
///
/// Each table's first variable is its child, the remaining ones its parents.
/// With `dag` given, the inferred structure is checked against it; otherwise
/// the structure is deduced from the tables. Checks: exactly one table per
/// variable, consistent state lists across tables, acyclicity, and
/// conditional normalization.
pub fn validate_cpt_list(tables: Vec<SparseTable>, dag: Option<&Dag>) -> Result<NetworkSpec> {
    if tables.is_empty() {
        return Err(Error::InvalidTable("no conditional tables given".into()));
    }
    // child/parent structure from first-variable convention
    let mut decls: Vec<(String, Vec<String>)> = Vec::with_capacity(tables.len());
    for t in &tables {
        let labels = t.domain().labels();
        if labels.is_empty() {
            return Err(Error::InvalidTable("conditional table with no variables".into()));
        }
        let child = labels[0].clone();
        if decls.iter().any(|(c, _)| *c == child) {
            return Err(Error::DuplicateChild(child));
        }
        decls.push((child, labels[1..].to_vec()));
    }

    // state lists must agree wherever a variable appears
    let mut states: IndexMap<String, Vec<String>> = IndexMap::new();
    for t in &tables {
        let d = t.domain();
        for (i, label) in d.labels().iter().enumerate() {
            let sts = d.states(i).to_vec();
            match states.get(label) {
                Some(existing) if *existing != sts => {
                    return Err(Error::DomainConflict {
                        label: label.clone(),
                        detail: "state lists differ between tables".into(),
                    });
                }
                Some(_) => {}
                None => {
                    states.insert(label.clone(), sts);
                }
            }
        }
    }
    // every referenced variable needs its own table
    for (label, _) in &states {
        if !decls.iter().any(|(c, _)| c == label) {
            return Err(Error::UnknownLabel(format!(
                "variable '{label}' appears as a parent but has no table"
            )));
        }
    }

    let inferred = Dag::new(
        &decls
            .iter()
            .map(|(c, ps)| (c.clone(), ps.clone()))
            .collect::<Vec<_>>(),
    )?;
    if let Some(given) = dag {
        check_same_structure(given, &inferred)?;
    }

    // child-major order of tables follows the declaration order
    let domain = Domain::new(
        inferred
            .nodes()
            .iter()
            .map(|n| (n.clone(), states[n].clone()))
            .collect(),
    )?;

    for (t, (child, _)) in tables.iter().zip(decls.iter()) {
        check_cpt_normalized(t, child)?;
    }

    Ok(NetworkSpec { domain, dag: inferred, cpts: tables })
}

fn check_same_structure(given: &Dag, inferred: &Dag) -> Result<()> {
    if given.nodes().len() != inferred.nodes().len() {
        return Err(Error::InvalidDomain("node sets differ from the given structure".into()));
    }
    for (i, node) in inferred.nodes().iter().enumerate() {
        let gi = given
            .nodes()
            .iter()
            .position(|n| n == node)
            .ok_or_else(|| Error::UnknownLabel(node.clone()))?;
        let mut a: Vec<&str> =
            inferred.parents(i).iter().map(|&p| inferred.nodes()[p].as_str()).collect();
        let mut b: Vec<&str> =
            given.parents(gi).iter().map(|&p| given.nodes()[p].as_str()).collect();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(Error::InvalidDomain(format!(
                "parents of '{node}' differ from the given structure"
            )));
        }
    }
    Ok(())
}

/// Every parent configuration with support must sum to one.
fn check_cpt_normalized(t: &SparseTable, child: &str) -> Result<()> {
    if t.is_empty() {
        return Err(Error::CptNotNormalized { child: child.to_string(), total: 0.0 });
    }
    if t.domain().len() == 1 {
        let total = t.sum();
        if (total - 1.0).abs() > CPT_TOL {
            return Err(Error::CptNotNormalized { child: child.to_string(), total });
        }
        return Ok(());
    }
    let sums = t.marg(&[child])?;
    for &total in sums.vals() {
        if (total - 1.0).abs() > CPT_TOL {
            return Err(Error::CptNotNormalized { child: child.to_string(), total });
        }
    }
    Ok(())
}

/// Observed states, one per variable.
#[derive(Debug, Clone, Default)]
pub struct Evidence {
    assignments: IndexMap<String, String>,
}

impl Evidence {
    pub fn new() -> Evidence {
        Evidence::default()
    }

    /// Record an observation; observing the same variable twice is an error
    /// unless the state matches.
    pub fn insert(&mut self, var: impl Into<String>, state: impl Into<String>) -> Result<()> {
        let var = var.into();
        let state = state.into();
        match self.assignments.get(&var) {
            Some(existing) if *existing != state => Err(Error::DuplicateEvidence(var)),
            _ => {
                self.assignments.insert(var, state);
                Ok(())
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.assignments.get(var).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.assignments.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Check every observation against a domain.
    pub fn validate(&self, domain: &Domain) -> Result<()> {
        for (var, state) in self.iter() {
            let states = domain.states_of(var)?;
            if !states.iter().any(|s| s == state) {
                return Err(Error::UnknownState { label: var.into(), state: state.into() });
            }
        }
        Ok(())
    }

    /// The observations that mention variables of `domain`, as slice pairs.
    pub fn restricted_to(&self, domain: &Domain) -> Vec<(&str, &str)> {
        self.iter().filter(|(v, _)| domain.contains(v)).collect()
    }

    /// Merge another evidence set into this one; conflicts are errors.
    pub fn merge(&mut self, other: &Evidence) -> Result<()> {
        for (v, s) in other.iter() {
            self.insert(v, s)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseTable;
    use crate::fixtures;

    fn table(labels: &[(&str, usize)], values: Vec<f64>) -> SparseTable {
        let d = Domain::new(
            labels
                .iter()
                .map(|(n, k)| (n.to_string(), (1..=*k).map(|i| format!("s{i}")).collect()))
                .collect(),
        )
        .unwrap();
        SparseTable::from_dense(&DenseTable::new(d, values).unwrap())
    }

    #[test]
    fn single_variable_network() {
        let spec = validate_cpt_list(vec![table(&[("a", 2)], vec![0.3, 0.7])], None).unwrap();
        assert_eq!(spec.n_vars(), 1);
        assert_eq!(spec.factorization(), ["P( a )"]);
    }

    #[test]
    fn two_cycle_is_rejected() {
        let t1 = table(&[("a", 2), ("b", 2)], vec![0.2, 0.8, 0.6, 0.4]);
        let t2 = table(&[("b", 2), ("a", 2)], vec![0.5, 0.5, 0.9, 0.1]);
        assert!(matches!(validate_cpt_list(vec![t1, t2], None), Err(Error::Cycle(_))));
    }

    #[test]
    fn duplicate_child_is_rejected() {
        let t1 = table(&[("a", 2)], vec![0.3, 0.7]);
        let t2 = table(&[("a", 2)], vec![0.6, 0.4]);
        assert!(matches!(
            validate_cpt_list(vec![t1, t2], None),
            Err(Error::DuplicateChild(_))
        ));
    }

    #[test]
    fn non_normalized_cpt_names_the_child() {
        let t1 = table(&[("a", 2)], vec![0.3, 0.6]);
        match validate_cpt_list(vec![t1], None) {
            Err(Error::CptNotNormalized { child, .. }) => assert_eq!(child, "a"),
            other => panic!("expected normalization error, got {other:?}"),
        }
    }

    #[test]
    fn missing_parent_table_is_rejected() {
        let t = table(&[("a", 2), ("b", 2)], vec![0.2, 0.8, 0.6, 0.4]);
        assert!(validate_cpt_list(vec![t], None).is_err());
    }

    #[test]
    fn state_list_conflicts_are_rejected() {
        let t1 = table(&[("a", 2)], vec![0.3, 0.7]);
        let d = Domain::new(vec![
            ("b".to_string(), vec!["s1".to_string(), "s2".into()]),
            ("a".to_string(), vec!["s2".to_string(), "s1".into()]),
        ])
        .unwrap();
        let t2 = SparseTable::from_dense(
            &DenseTable::new(d, vec![0.2, 0.8, 0.6, 0.4]).unwrap(),
        );
        assert!(matches!(
            validate_cpt_list(vec![t1, t2], None),
            Err(Error::DomainConflict { .. })
        ));
    }

    #[test]
    fn asia_factorization_matches() {
        let spec = crate::format::parse_network(fixtures::ASIA_JSON).unwrap();
        let f = spec.factorization();
        assert_eq!(
            f,
            [
                "P( asia )",
                "P( tub | asia )",
                "P( smoke )",
                "P( lung | smoke )",
                "P( bronc | smoke )",
                "P( either | lung, tub )",
                "P( xray | either )",
                "P( dysp | bronc, either )",
            ]
        );
    }

    #[test]
    fn given_structure_is_checked() {
        let t1 = table(&[("a", 2)], vec![0.3, 0.7]);
        let t2 = table(&[("b", 2), ("a", 2)], vec![0.5, 0.5, 0.9, 0.1]);
        let good = Dag::new(&[("a", vec![]), ("b", vec!["a"])]).unwrap();
        let bad = Dag::new(&[("a", vec!["b"]), ("b", vec![])]).unwrap();
        assert!(validate_cpt_list(vec![t1.clone(), t2.clone()], Some(&good)).is_ok());
        assert!(validate_cpt_list(vec![t1, t2], Some(&bad)).is_err());
    }

    #[test]
    fn evidence_rejects_conflicts_and_unknowns() {
        let mut e = Evidence::new();
        e.insert("tub", "yes").unwrap();
        e.insert("tub", "yes").unwrap();
        assert!(matches!(e.insert("tub", "no"), Err(Error::DuplicateEvidence(_))));
        let d = Domain::new(vec![("tub", vec!["yes", "no"])]).unwrap();
        e.validate(&d).unwrap();
        let mut bad = Evidence::new();
        bad.insert("tub", "maybe").unwrap();
        assert!(bad.validate(&d).is_err());
    }
}
