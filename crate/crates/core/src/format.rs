//! The JSON network file format and evidence argument parsing.
//!
//! A network file declares `variables` (name plus ordered states) and
//! `cpts` (child, parents, flat values). Values are linearized with the
//! child varying fastest, then the parents in listed order.

use serde::{Deserialize, Serialize};

use crate::dense::DenseTable;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::network::{validate_cpt_list, Evidence, NetworkSpec};
use crate::sparse::SparseTable;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub variables: Vec<VariableDecl>,
    pub cpts: Vec<CptDecl>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDecl {
    pub name: String,
    pub states: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CptDecl {
    pub child: String,
    pub parents: Vec<String>,
    pub values: Vec<f64>,
}

/// Parse and validate a network document.
pub fn parse_network(text: &str) -> Result<NetworkSpec> {
    let file: NetworkFile = serde_json::from_str(text)?;
    spec_from_file(&file)
}

pub fn spec_from_file(file: &NetworkFile) -> Result<NetworkSpec> {
    for (i, v) in file.variables.iter().enumerate() {
        if file.variables[..i].iter().any(|w| w.name == v.name) {
            return Err(Error::Parse(format!("variable '{}' declared twice", v.name)));
        }
    }
    let states_of = |name: &str| -> Result<Vec<String>> {
        file.variables
            .iter()
            .find(|v| v.name == name)
            .map(|v| v.states.clone())
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    };
    let mut tables = Vec::with_capacity(file.cpts.len());
    for cpt in &file.cpts {
        let mut pairs = vec![(cpt.child.clone(), states_of(&cpt.child)?)];
        for p in &cpt.parents {
            pairs.push((p.clone(), states_of(p)?));
        }
        let domain = Domain::new(pairs)?;
        let expected = domain.statespace_size()?;
        if cpt.values.len() as u64 != expected {
            return Err(Error::WrongValueCount {
                child: cpt.child.clone(),
                expected,
                got: cpt.values.len(),
            });
        }
        let dense = DenseTable::new(domain, cpt.values.clone())?;
        tables.push(SparseTable::from_dense(&dense));
    }
    for v in &file.variables {
        if !file.cpts.iter().any(|c| c.child == v.name) {
            return Err(Error::Parse(format!("variable '{}' has no table", v.name)));
        }
    }
    validate_cpt_list(tables, None)
}

/// Serialize a network back into the file format. The variable order follows
/// the network's domain, and each table is densified under the declared
/// linearization.
pub fn serialize_network(spec: &NetworkSpec) -> Result<String> {
    let domain = spec.domain();
    let variables = domain
        .labels()
        .iter()
        .enumerate()
        .map(|(i, name)| VariableDecl { name: clone_str(name), states: domain.states(i).to_vec() })
        .collect();
    let mut cpts = Vec::with_capacity(spec.cpts().len());
    for (i, table) in spec.cpts().iter().enumerate() {
        let child = spec.dag().nodes()[i].clone();
        let parents: Vec<String> = spec
            .dag()
            .parents(i)
            .iter()
            .map(|&p| spec.dag().nodes()[p].clone())
            .collect();
        let values = table.to_dense()?.values().to_vec();
        cpts.push(CptDecl { child, parents, values });
    }
    let file = NetworkFile { variables, cpts };
    Ok(serde_json::to_string_pretty(&file)?)
}

fn clone_str(s: &str) -> String {
    s.to_string()
}

/// Parse evidence tokens of the form `var=state`.
pub fn parse_evidence<S: AsRef<str>>(tokens: &[S]) -> Result<Evidence> {
    let mut evidence = Evidence::new();
    for token in tokens {
        let token = token.as_ref();
        let mut parts = token.splitn(2, '=');
        let var = parts.next().unwrap_or("");
        let state = parts.next();
        match state {
            Some(state) if !var.is_empty() && !state.is_empty() && !state.contains('=') => {
                if evidence.get(var).is_some() {
                    return Err(Error::DuplicateEvidence(var.to_string()));
                }
                evidence.insert(var, state)?;
            }
            _ => return Err(Error::MalformedEvidence(token.to_string())),
        }
    }
    Ok(evidence)
}
