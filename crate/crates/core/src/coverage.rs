//! Functional coverage: coverpoints, crosses, hit accounting and the
//! one-hot goal encoding fed to the network.
//!
//! Bins are flattened into a single id space: the bins of every standalone
//! coverpoint in declaration order, then the bins of every cross. A cross
//! bin's local index is the mixed-radix composition of its members' bin
//! indices, first member most significant.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dut::{DutKind, DutSpec, PortRef, ResponseVector, StimulusVector};
use crate::error::{Error, Result};

/// Upper bound on the flattened bin count of one model.
pub const MAX_BINS: usize = 1 << 24;

/// One bin of a coverpoint, as written in a model description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinSpec {
    /// Inclusive value range.
    Range(u64, u64),
    Values(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BinsSpec {
    /// `"each"`: one bin per port value.
    Each(EachKeyword),
    List(Vec<BinSpec>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EachKeyword {
    Each,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverpointDesc {
    pub name: String,
    /// Name of the input or output port this coverpoint samples.
    pub port: String,
    pub bins: BinsSpec,
    /// When false the coverpoint only feeds crosses and owns no bins.
    #[serde(default = "default_true")]
    pub standalone: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossDesc {
    pub name: String,
    pub coverpoints: Vec<String>,
}

/// Serializable description of a coverage model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageModelDesc {
    pub coverpoints: Vec<CoverpointDesc>,
    #[serde(default)]
    pub crosses: Vec<CrossDesc>,
}

impl CoverageModelDesc {
    /// Comparator: one bin per value on `a` and `b` plus the full `a × b`
    /// cross. ALU: `op`, `a`, `b` per value plus `op × a`.
    pub fn default_for(kind: DutKind) -> Self {
        let cp = |name: &str| CoverpointDesc {
            name: name.to_string(),
            port: name.to_string(),
            bins: BinsSpec::Each(EachKeyword::Each),
            standalone: true,
        };
        match kind {
            DutKind::Comparator => CoverageModelDesc {
                coverpoints: vec![cp("a"), cp("b")],
                crosses: vec![CrossDesc {
                    name: "a_x_b".into(),
                    coverpoints: vec!["a".into(), "b".into()],
                }],
            },
            DutKind::Alu => CoverageModelDesc {
                coverpoints: vec![cp("op"), cp("a"), cp("b")],
                crosses: vec![CrossDesc {
                    name: "op_x_a".into(),
                    coverpoints: vec!["op".into(), "a".into()],
                }],
            },
        }
    }

    /// The comparator's `a × b` cross alone, with no standalone coverpoint
    /// bins.
    pub fn comparator_cross_only() -> Self {
        let mut desc = Self::default_for(DutKind::Comparator);
        for cp in &mut desc.coverpoints {
            cp.standalone = false;
        }
        desc
    }
}

#[derive(Debug, Clone)]
enum Lookup {
    /// Bin index equals the value.
    Identity(u64),
    /// Sorted, disjoint `(lo, hi, bin)` intervals.
    Intervals(Vec<(u64, u64, usize)>),
}

#[derive(Debug, Clone)]
pub struct Coverpoint {
    pub name: String,
    pub source: PortRef,
    pub standalone: bool,
    bin_count: usize,
    lookup: Lookup,
}

impl Coverpoint {
    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    /// Bin index of `value`, if any bin holds it.
    pub fn bin_of(&self, value: u64) -> Option<usize> {
        match &self.lookup {
            Lookup::Identity(n) => (value < *n).then_some(value as usize),
            Lookup::Intervals(iv) => {
                let i = iv.partition_point(|&(lo, _, _)| lo <= value);
                let (lo, hi, bin) = *iv.get(i.checked_sub(1)?)?;
                (lo <= value && value <= hi).then_some(bin)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Cross {
    pub name: String,
    pub members: Vec<usize>,
    radices: Vec<usize>,
    size: usize,
}

impl Cross {
    pub fn bin_count(&self) -> usize {
        self.size
    }

    /// Mixed-radix composition, first member most significant.
    pub fn compose(&self, member_bins: &[usize]) -> usize {
        member_bins
            .iter()
            .zip(&self.radices)
            .fold(0, |acc, (&b, &r)| acc * r + b)
    }

    pub fn decompose(&self, mut local: usize) -> Vec<usize> {
        let mut out = vec![0; self.radices.len()];
        for (slot, &r) in out.iter_mut().zip(&self.radices).rev() {
            *slot = local % r;
            local /= r;
        }
        out
    }
}

/// What a flattened bin id refers to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BinRef {
    Coverpoint { coverpoint: usize, bin: usize },
    Cross { cross: usize, member_bins: Vec<usize> },
}

/// A coverage model resolved against a DUT's ports.
#[derive(Debug, Clone)]
pub struct CoverageModel {
    desc: CoverageModelDesc,
    coverpoints: Vec<Coverpoint>,
    crosses: Vec<Cross>,
    /// Flattened offset of each coverpoint's bins (meaningless when the
    /// coverpoint is not standalone).
    cp_offsets: Vec<usize>,
    cross_offsets: Vec<usize>,
    total: usize,
    inputs: usize,
    outputs: usize,
}

impl CoverageModel {
    pub fn build(desc: &CoverageModelDesc, spec: &DutSpec) -> Result<Self> {
        let mut coverpoints: Vec<Coverpoint> = Vec::with_capacity(desc.coverpoints.len());
        for cp in &desc.coverpoints {
            if coverpoints.iter().any(|c| c.name == cp.name) {
                return Err(Error::Config(format!("duplicate coverpoint `{}`", cp.name)));
            }
            let source = spec
                .find_port(&cp.port)
                .ok_or_else(|| Error::Config(format!("coverpoint `{}` samples unknown port `{}`", cp.name, cp.port)))?;
            let port = spec.port(source);
            let (bin_count, lookup) = match &cp.bins {
                BinsSpec::Each(_) => {
                    if port.width > 24 {
                        return Err(Error::Config(format!(
                            "coverpoint `{}`: one bin per value needs a port of at most 24 bits",
                            cp.name
                        )));
                    }
                    let n = 1u64 << port.width;
                    (n as usize, Lookup::Identity(n))
                }
                BinsSpec::List(bins) => {
                    let mut iv = Vec::new();
                    for (bin, spec_bin) in bins.iter().enumerate() {
                        match spec_bin {
                            BinSpec::Range(lo, hi) => {
                                if lo > hi || *hi > port.max_value() {
                                    return Err(Error::Config(format!(
                                        "coverpoint `{}`: bad range [{lo}, {hi}]",
                                        cp.name
                                    )));
                                }
                                iv.push((*lo, *hi, bin));
                            }
                            BinSpec::Values(values) => {
                                if values.is_empty() {
                                    return Err(Error::Config(format!("coverpoint `{}`: empty value bin", cp.name)));
                                }
                                for &v in values {
                                    if v > port.max_value() {
                                        return Err(Error::Config(format!(
                                            "coverpoint `{}`: value {v} exceeds port width",
                                            cp.name
                                        )));
                                    }
                                    iv.push((v, v, bin));
                                }
                            }
                        }
                    }
                    iv.sort_unstable();
                    if let Some(w) = iv.windows(2).find(|w| w[1].0 <= w[0].1) {
                        return Err(Error::Config(format!(
                            "coverpoint `{}`: bins overlap at value {}",
                            cp.name, w[1].0
                        )));
                    }
                    if bins.is_empty() {
                        return Err(Error::Config(format!("coverpoint `{}` has no bins", cp.name)));
                    }
                    (bins.len(), Lookup::Intervals(iv))
                }
            };
            coverpoints.push(Coverpoint {
                name: cp.name.clone(),
                source,
                standalone: cp.standalone,
                bin_count,
                lookup,
            });
        }

        let mut crosses = Vec::with_capacity(desc.crosses.len());
        for cross in &desc.crosses {
            if cross.coverpoints.len() < 2 {
                return Err(Error::Config(format!(
                    "cross `{}` needs at least two coverpoints",
                    cross.name
                )));
            }
            let mut members = Vec::new();
            for name in &cross.coverpoints {
                let idx = coverpoints.iter().position(|c| &c.name == name).ok_or_else(|| {
                    Error::Config(format!("cross `{}` names unknown coverpoint `{name}`", cross.name))
                })?;
                if members.contains(&idx) {
                    return Err(Error::Config(format!(
                        "cross `{}` repeats coverpoint `{name}`",
                        cross.name
                    )));
                }
                members.push(idx);
            }
            let radices: Vec<usize> = members.iter().map(|&m| coverpoints[m].bin_count).collect();
            let size = radices
                .iter()
                .try_fold(1usize, |acc, &r| acc.checked_mul(r).filter(|&n| n <= MAX_BINS))
                .ok_or_else(|| Error::Config(format!("cross `{}` has too many bins", cross.name)))?;
            crosses.push(Cross {
                name: cross.name.clone(),
                members,
                radices,
                size,
            });
        }

        let mut total = 0usize;
        let mut cp_offsets = Vec::with_capacity(coverpoints.len());
        for cp in &coverpoints {
            cp_offsets.push(total);
            if cp.standalone {
                total += cp.bin_count;
            }
        }
        let mut cross_offsets = Vec::with_capacity(crosses.len());
        for cross in &crosses {
            cross_offsets.push(total);
            total += cross.size;
        }
        if total == 0 {
            return Err(Error::Config("coverage model has no bins".into()));
        }
        if total > MAX_BINS {
            return Err(Error::Config(format!(
                "coverage model has {total} bins, limit {MAX_BINS}"
            )));
        }

        Ok(CoverageModel {
            desc: desc.clone(),
            coverpoints,
            crosses,
            cp_offsets,
            cross_offsets,
            total,
            inputs: spec.inputs.len(),
            outputs: spec.outputs.len(),
        })
    }

    /// The default model for a DUT kind.
    pub fn default_model(kind: DutKind, spec: &DutSpec) -> Result<Self> {
        Self::build(&CoverageModelDesc::default_for(kind), spec)
    }

    pub fn desc(&self) -> &CoverageModelDesc {
        &self.desc
    }

    pub fn total_bins(&self) -> usize {
        self.total
    }

    pub fn coverpoints(&self) -> &[Coverpoint] {
        &self.coverpoints
    }

    pub fn crosses(&self) -> &[Cross] {
        &self.crosses
    }

    /// Number of bins a single sample lands in.
    pub fn groups(&self) -> usize {
        self.coverpoints.iter().filter(|c| c.standalone).count() + self.crosses.len()
    }

    /// Flattened id of a standalone coverpoint's bin.
    pub fn coverpoint_bin_id(&self, coverpoint: usize, bin: usize) -> Option<usize> {
        let cp = self.coverpoints.get(coverpoint)?;
        (cp.standalone && bin < cp.bin_count).then(|| self.cp_offsets[coverpoint] + bin)
    }

    pub fn cross_bin_id(&self, cross: usize, member_bins: &[usize]) -> usize {
        self.cross_offsets[cross] + self.crosses[cross].compose(member_bins)
    }

    pub fn bin_ref(&self, id: usize) -> Result<BinRef> {
        if id >= self.total {
            return Err(Error::Precondition(format!(
                "bin id {id} out of range for {} bins",
                self.total
            )));
        }
        for (c, &offset) in self.cross_offsets.iter().enumerate().rev() {
            if id >= offset {
                return Ok(BinRef::Cross {
                    cross: c,
                    member_bins: self.crosses[c].decompose(id - offset),
                });
            }
        }
        for (i, cp) in self.coverpoints.iter().enumerate().rev() {
            if cp.standalone && id >= self.cp_offsets[i] {
                return Ok(BinRef::Coverpoint {
                    coverpoint: i,
                    bin: id - self.cp_offsets[i],
                });
            }
        }
        unreachable!("bin id below every offset")
    }

    /// Human-readable bin name, e.g. `a[3]` or `a_x_b[2,1]`.
    pub fn bin_label(&self, id: usize) -> Result<String> {
        Ok(match self.bin_ref(id)? {
            BinRef::Coverpoint { coverpoint, bin } => {
                format!("{}[{bin}]", self.coverpoints[coverpoint].name)
            }
            BinRef::Cross { cross, member_bins } => {
                let parts: Vec<String> = member_bins.iter().map(|b| b.to_string()).collect();
                format!("{}[{}]", self.crosses[cross].name, parts.join(","))
            }
        })
    }

    /// Flattened ids of the bins one transaction lands in: one per
    /// standalone coverpoint, then one per cross.
    pub fn locate(&self, stimulus: &StimulusVector, response: &ResponseVector) -> Result<Vec<usize>> {
        if stimulus.0.len() != self.inputs || response.0.len() != self.outputs {
            return Err(Error::Structural(format!(
                "sample has {}/{} values, model expects {}/{}",
                stimulus.0.len(),
                response.0.len(),
                self.inputs,
                self.outputs
            )));
        }
        let mut local = Vec::with_capacity(self.coverpoints.len());
        for cp in &self.coverpoints {
            let value = match cp.source {
                PortRef::Input(i) => stimulus.0[i],
                PortRef::Output(i) => response.0[i],
            };
            let bin = cp.bin_of(value).ok_or_else(|| Error::ModelCompleteness {
                coverpoint: cp.name.clone(),
                value,
            })?;
            local.push(bin);
        }
        let mut ids = Vec::with_capacity(self.groups());
        for (i, cp) in self.coverpoints.iter().enumerate() {
            if cp.standalone {
                ids.push(self.cp_offsets[i] + local[i]);
            }
        }
        let mut members = Vec::new();
        for (c, cross) in self.crosses.iter().enumerate() {
            members.clear();
            members.extend(cross.members.iter().map(|&m| local[m]));
            ids.push(self.cross_offsets[c] + cross.compose(&members));
        }
        Ok(ids)
    }

    /// One-hot goal vector of length `total_bins`.
    pub fn encode_target(&self, bin_id: usize) -> Result<Vec<f64>> {
        if bin_id >= self.total {
            return Err(Error::Precondition(format!(
                "bin id {bin_id} out of range for {} bins",
                self.total
            )));
        }
        let mut v = vec![0.0; self.total];
        v[bin_id] = 1.0;
        Ok(v)
    }
}

/// Per-bin hit counters for one run.
#[derive(Debug, Clone)]
pub struct CoverageDatabase {
    model: Arc<CoverageModel>,
    hits: Vec<u64>,
    covered: usize,
}

impl CoverageDatabase {
    pub fn new(model: Arc<CoverageModel>) -> Self {
        let hits = vec![0; model.total_bins()];
        CoverageDatabase {
            model,
            hits,
            covered: 0,
        }
    }

    pub fn model(&self) -> &Arc<CoverageModel> {
        &self.model
    }

    /// Records one transaction; returns the ids whose counter went 0 → 1.
    pub fn sample(&mut self, stimulus: &StimulusVector, response: &ResponseVector) -> Result<Vec<usize>> {
        let ids = self.model.locate(stimulus, response)?;
        Ok(self.record(&ids))
    }

    /// Bumps already-located bins.
    pub fn record(&mut self, ids: &[usize]) -> Vec<usize> {
        let mut newly = Vec::new();
        for &id in ids {
            if self.hits[id] == 0 {
                self.covered += 1;
                newly.push(id);
            }
            self.hits[id] += 1;
        }
        newly
    }

    pub fn coverage_fraction(&self) -> f64 {
        self.covered as f64 / self.hits.len() as f64
    }

    pub fn covered_bins(&self) -> usize {
        self.covered
    }

    pub fn total_bins(&self) -> usize {
        self.hits.len()
    }

    pub fn is_covered(&self, id: usize) -> bool {
        self.hits.get(id).is_some_and(|&h| h > 0)
    }

    pub fn hits(&self) -> &[u64] {
        &self.hits
    }

    /// Ids of unhit bins in ascending order.
    pub fn uncovered(&self) -> Vec<usize> {
        self.uncovered_iter().collect()
    }

    pub fn uncovered_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.hits.iter().enumerate().filter(|(_, &h)| h == 0).map(|(i, _)| i)
    }

    pub fn encode_target(&self, bin_id: usize) -> Result<Vec<f64>> {
        self.model.encode_target(bin_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dut::{comparator_eval, Alu, Comparator, Dut};
    use std::collections::BTreeSet;

    fn cross_only(width: u32) -> (Comparator, CoverageDatabase) {
        let dut = Comparator::new(width).unwrap();
        let model = CoverageModel::build(&CoverageModelDesc::comparator_cross_only(), dut.spec()).unwrap();
        (dut, CoverageDatabase::new(Arc::new(model)))
    }

    fn apply(db: &mut CoverageDatabase, a: u64, b: u64, width: u32) -> Vec<usize> {
        let r = comparator_eval(a, b, width).unwrap();
        db.sample(&StimulusVector(vec![a, b]), &r).unwrap()
    }

    #[test]
    fn cross_index_is_mixed_radix() {
        let (_, mut db) = cross_only(2);
        assert_eq!(db.total_bins(), 16);
        assert_eq!(db.coverage_fraction(), 0.0);
        assert_eq!(apply(&mut db, 2, 1, 2), vec![9]);
        assert_eq!(db.coverage_fraction(), 0.0625);
        assert!(apply(&mut db, 2, 1, 2).is_empty());
        let mut expected: Vec<usize> = (0..9).collect();
        expected.extend(10..16);
        assert_eq!(db.uncovered(), expected);
    }

    #[test]
    fn exhaustive_sweep_hits_each_cross_bin_once() {
        let (_, mut db) = cross_only(2);
        assert_eq!(db.uncovered(), (0..16).collect::<Vec<_>>());
        for a in 0..4 {
            for b in 0..4 {
                apply(&mut db, a, b, 2);
            }
        }
        assert_eq!(db.hits(), &[1; 16]);
        assert_eq!(db.coverage_fraction(), 1.0);
        assert!(db.uncovered().is_empty());
    }

    #[test]
    fn default_model_sizes() {
        for (width, cross) in [(1u32, 4usize), (2, 16), (3, 64)] {
            let dut = Comparator::new(width).unwrap();
            let m = CoverageModel::default_model(DutKind::Comparator, dut.spec()).unwrap();
            assert_eq!(m.crosses()[0].bin_count(), cross);
            assert_eq!(m.total_bins(), cross + 2 * (1 << width));
            assert_eq!(m.groups(), 3);
        }
        let alu = Alu::buggy(4).unwrap();
        let m = CoverageModel::default_model(DutKind::Alu, alu.spec()).unwrap();
        assert_eq!(m.total_bins(), 4 + 16 + 16 + 64);
    }

    #[test]
    fn one_hot_round_trip() {
        let (_, db) = cross_only(2);
        let v = db.encode_target(9).unwrap();
        let mut expected = vec![0.0; 16];
        expected[9] = 1.0;
        assert_eq!(v, expected);
        for id in 0..16 {
            let v = db.encode_target(id).unwrap();
            let argmax = v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            assert_eq!(argmax, id);
        }
        assert!(db.encode_target(16).is_err());

        let desc = CoverageModelDesc {
            coverpoints: vec![CoverpointDesc {
                name: "r".into(),
                port: "result".into(),
                bins: BinsSpec::List(vec![
                    BinSpec::Values(vec![0]),
                    BinSpec::Values(vec![1]),
                    BinSpec::Values(vec![2]),
                ]),
                standalone: true,
            }],
            crosses: vec![],
        };
        let m = CoverageModel::build(&desc, Comparator::new(2).unwrap().spec()).unwrap();
        assert_eq!(m.encode_target(0).unwrap(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn unmatched_value_is_an_error() {
        let desc = CoverageModelDesc {
            coverpoints: vec![CoverpointDesc {
                name: "a_low".into(),
                port: "a".into(),
                bins: BinsSpec::List(vec![BinSpec::Range(0, 1)]),
                standalone: true,
            }],
            crosses: vec![],
        };
        let dut = Comparator::new(2).unwrap();
        let mut db = CoverageDatabase::new(Arc::new(CoverageModel::build(&desc, dut.spec()).unwrap()));
        let r = comparator_eval(3, 0, 2).unwrap();
        assert!(matches!(
            db.sample(&StimulusVector(vec![3, 0]), &r),
            Err(Error::ModelCompleteness { value: 3, .. })
        ));
    }

    #[test]
    fn malformed_models_rejected() {
        let spec = Comparator::new(3).unwrap().spec().clone();
        let bins = |b: Vec<BinSpec>| CoverageModelDesc {
            coverpoints: vec![CoverpointDesc {
                name: "a".into(),
                port: "a".into(),
                bins: BinsSpec::List(b),
                standalone: true,
            }],
            crosses: vec![],
        };
        assert!(CoverageModel::build(&bins(vec![BinSpec::Range(0, 3), BinSpec::Range(3, 7)]), &spec).is_err());
        assert!(CoverageModel::build(&bins(vec![BinSpec::Range(0, 8)]), &spec).is_err());
        assert!(CoverageModel::build(&bins(vec![]), &spec).is_err());
        assert!(CoverageModel::build(&bins(vec![BinSpec::Values(vec![])]), &spec).is_err());
        let mut d = bins(vec![BinSpec::Range(0, 7)]);
        d.coverpoints[0].port = "nope".into();
        assert!(CoverageModel::build(&d, &spec).is_err());
        let mut d = bins(vec![BinSpec::Range(0, 7)]);
        d.crosses.push(CrossDesc {
            name: "x".into(),
            coverpoints: vec!["a".into()],
        });
        assert!(CoverageModel::build(&d, &spec).is_err());
    }

    #[test]
    fn range_bins_on_wide_ports() {
        let desc = CoverageModelDesc {
            coverpoints: vec![CoverpointDesc {
                name: "a".into(),
                port: "a".into(),
                bins: BinsSpec::List(vec![
                    BinSpec::Values(vec![0, 255]),
                    BinSpec::Range(1, 127),
                    BinSpec::Range(128, 254),
                ]),
                standalone: true,
            }],
            crosses: vec![],
        };
        let dut = Comparator::new(8).unwrap();
        let m = CoverageModel::build(&desc, dut.spec()).unwrap();
        let cp = &m.coverpoints()[0];
        assert_eq!(cp.bin_of(0), Some(0));
        assert_eq!(cp.bin_of(255), Some(0));
        assert_eq!(cp.bin_of(1), Some(1));
        assert_eq!(cp.bin_of(127), Some(1));
        assert_eq!(cp.bin_of(128), Some(2));
        assert_eq!(cp.bin_of(254), Some(2));
    }

    #[test]
    fn bin_refs_and_labels() {
        let dut = Comparator::new(2).unwrap();
        let m = CoverageModel::default_model(DutKind::Comparator, dut.spec()).unwrap();
        assert_eq!(m.bin_ref(5).unwrap(), BinRef::Coverpoint { coverpoint: 1, bin: 1 });
        assert_eq!(
            m.bin_ref(8 + 9).unwrap(),
            BinRef::Cross {
                cross: 0,
                member_bins: vec![2, 1]
            }
        );
        assert_eq!(m.bin_label(17).unwrap(), "a_x_b[2,1]");
        assert_eq!(m.bin_label(3).unwrap(), "a[3]");
        assert_eq!(m.cross_bin_id(0, &[2, 1]), 17);
        assert_eq!(m.coverpoint_bin_id(1, 1), Some(5));
        assert!(m.bin_ref(24).is_err());
    }

    #[test]
    fn model_description_json_round_trip_keeps_ids() {
        let dut = Alu::buggy(3).unwrap();
        let desc = CoverageModelDesc::default_for(DutKind::Alu);
        let json = serde_json::to_string(&desc).unwrap();
        let reloaded: CoverageModelDesc = serde_json::from_str(&json).unwrap();
        assert_eq!(reloaded, desc);
        let a = CoverageModel::build(&desc, dut.spec()).unwrap();
        let b = CoverageModel::build(&reloaded, dut.spec()).unwrap();
        for op in 0..4 {
            for x in 0..8 {
                for y in 0..8 {
                    let s = StimulusVector(vec![op, x, y]);
                    let r = dut.eval(&s).unwrap();
                    assert_eq!(a.locate(&s, &r).unwrap(), b.locate(&s, &r).unwrap());
                }
            }
        }
        let parsed: CoverageModelDesc = serde_json::from_str(
            r#"{"coverpoints":[{"name":"a","port":"a","bins":[{"range":[0,3]},{"values":[4,5,6,7]}]}]}"#,
        )
        .unwrap();
        assert_eq!(
            parsed.coverpoints[0].bins,
            BinsSpec::List(vec![BinSpec::Range(0, 3), BinSpec::Values(vec![4, 5, 6, 7])])
        );
        assert!(serde_json::from_str::<CoverageModelDesc>(r#"{"coverpoints":[],"extra":1}"#).is_err());
    }

    /// Brute-force oracle: recount hits from the raw (a, b) stream and
    /// compare against the database at every step.
    #[test]
    fn exhaustive_sweep_matches_recount_oracle() {
        for width in 1..=3u32 {
            let dut = Comparator::new(width).unwrap();
            let model = Arc::new(CoverageModel::default_model(DutKind::Comparator, dut.spec()).unwrap());
            let mut db = CoverageDatabase::new(model.clone());
            let n = 1u64 << width;
            let total = model.total_bins();
            let mut recount = vec![0u64; total];
            let mut last_fraction = 0.0;
            let mut pairs_seen = BTreeSet::new();
            for a in 0..n {
                for b in 0..n {
                    let before: BTreeSet<usize> = db.uncovered().into_iter().collect();
                    let r = comparator_eval(a, b, width).unwrap();
                    let newly = db.sample(&StimulusVector(vec![a, b]), &r).unwrap();
                    recount[a as usize] += 1;
                    recount[(n + b) as usize] += 1;
                    recount[(2 * n + a * n + b) as usize] += 1;
                    pairs_seen.insert((a, b));
                    assert_eq!(db.hits(), recount.as_slice());
                    let after: BTreeSet<usize> = db.uncovered().into_iter().collect();
                    let oracle: BTreeSet<usize> = (0..total).filter(|&i| recount[i] == 0).collect();
                    assert_eq!(after, oracle);
                    let removed: Vec<usize> = before.difference(&after).copied().collect();
                    assert_eq!(removed, newly);
                    let f = db.coverage_fraction();
                    assert!(f >= last_fraction);
                    last_fraction = f;
                    let last_pair = pairs_seen.len() as u64 == n * n;
                    assert_eq!(f == 1.0, last_pair);
                }
            }
            assert_eq!(db.coverage_fraction(), 1.0);
        }
    }
}
