//! Transaction-level device models.
//!
//! Every DUT here is combinational: one stimulus in, one response out, no
//! clock. A DUT also carries a golden model so each transaction can be
//! checked on the spot.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortSpec {
    pub name: String,
    pub width: u32,
    pub direction: Direction,
}

impl PortSpec {
    pub fn input(name: &str, width: u32) -> Self {
        PortSpec {
            name: name.to_string(),
            width,
            direction: Direction::In,
        }
    }

    pub fn output(name: &str, width: u32) -> Self {
        PortSpec {
            name: name.to_string(),
            width,
            direction: Direction::Out,
        }
    }

    /// Largest value the port can carry.
    pub fn max_value(&self) -> u64 {
        mask(self.width)
    }
}

/// All-ones mask of `width` bits.
pub fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Where a coverpoint (or any other observer) reads its value from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PortRef {
    Input(usize),
    Output(usize),
}

/// Port layout of a DUT. Port order is canonical: it fixes the order of
/// values in stimulus/response vectors and the bit concatenation order used
/// by the neural-network target encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DutSpec {
    pub name: String,
    pub inputs: Vec<PortSpec>,
    pub outputs: Vec<PortSpec>,
}

impl DutSpec {
    pub fn new(name: &str, inputs: Vec<PortSpec>, outputs: Vec<PortSpec>) -> Result<Self> {
        if inputs.is_empty() || outputs.is_empty() {
            return Err(Error::Structural(format!(
                "DUT `{name}` needs at least one input and one output port"
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for (port, expected) in inputs
            .iter()
            .map(|p| (p, Direction::In))
            .chain(outputs.iter().map(|p| (p, Direction::Out)))
        {
            if port.width == 0 || port.width > 64 {
                return Err(Error::Structural(format!(
                    "port `{}` has width {}, expected 1..=64",
                    port.name, port.width
                )));
            }
            if port.direction != expected {
                return Err(Error::Structural(format!(
                    "port `{}` is listed with the wrong direction",
                    port.name
                )));
            }
            if !seen.insert(port.name.as_str()) {
                return Err(Error::Structural(format!("duplicate port name `{}`", port.name)));
            }
        }
        Ok(DutSpec {
            name: name.to_string(),
            inputs,
            outputs,
        })
    }

    pub fn port(&self, port: PortRef) -> &PortSpec {
        match port {
            PortRef::Input(i) => &self.inputs[i],
            PortRef::Output(i) => &self.outputs[i],
        }
    }

    pub fn find_port(&self, name: &str) -> Option<PortRef> {
        if let Some(i) = self.inputs.iter().position(|p| p.name == name) {
            return Some(PortRef::Input(i));
        }
        self.outputs.iter().position(|p| p.name == name).map(PortRef::Output)
    }

    /// Total number of input bits, i.e. the length of the bit encoding of a
    /// stimulus.
    pub fn input_bits(&self) -> usize {
        self.inputs.iter().map(|p| p.width as usize).sum()
    }

    pub fn validate_stimulus(&self, stimulus: &StimulusVector) -> Result<()> {
        validate_values(&self.inputs, &stimulus.0, "stimulus")
    }

    pub fn validate_response(&self, response: &ResponseVector) -> Result<()> {
        validate_values(&self.outputs, &response.0, "response")
    }

    /// Concatenates the input ports' bits, first port first and MSB first
    /// within a port, as reals in {0, 1}.
    pub fn encode_bits(&self, stimulus: &StimulusVector) -> Vec<f64> {
        let mut bits = Vec::with_capacity(self.input_bits());
        for (port, &value) in self.inputs.iter().zip(&stimulus.0) {
            for shift in (0..port.width).rev() {
                bits.push(((value >> shift) & 1) as f64);
            }
        }
        bits
    }

    /// Inverse of [`DutSpec::encode_bits`] for already-thresholded bits.
    pub fn decode_bits(&self, bits: &[bool]) -> Result<StimulusVector> {
        if bits.len() != self.input_bits() {
            return Err(Error::Dimension {
                expected: self.input_bits(),
                actual: bits.len(),
            });
        }
        let mut values = Vec::with_capacity(self.inputs.len());
        let mut cursor = bits.iter();
        for port in &self.inputs {
            let mut value = 0u64;
            for _ in 0..port.width {
                value = (value << 1) | u64::from(*cursor.next().unwrap());
            }
            values.push(value);
        }
        Ok(StimulusVector(values))
    }
}

fn validate_values(ports: &[PortSpec], values: &[u64], what: &str) -> Result<()> {
    if ports.len() != values.len() {
        return Err(Error::Structural(format!(
            "{what} has {} values for {} ports",
            values.len(),
            ports.len()
        )));
    }
    for (port, &value) in ports.iter().zip(values) {
        if value > port.max_value() {
            return Err(Error::Precondition(format!(
                "{what} value {value} does not fit {}-bit port `{}`",
                port.width, port.name
            )));
        }
    }
    Ok(())
}

/// Values driven into the input ports, in canonical port order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StimulusVector(pub Vec<u64>);

/// Values read from the output ports, in canonical port order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResponseVector(pub Vec<u64>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestStatus {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl fmt::Display for TestStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestStatus::Pass => "PASS",
            TestStatus::Fail => "FAIL",
        })
    }
}

/// Comparator output encoding on its 2-bit `result` port. Value 3 never
/// occurs.
pub const CMP_LT: u64 = 0;
pub const CMP_EQ: u64 = 1;
pub const CMP_GT: u64 = 2;

fn check_operand(value: u64, width: u32, name: &str) -> Result<()> {
    if width == 0 || width > 64 {
        return Err(Error::Precondition(format!("width {width} outside 1..=64")));
    }
    if value > mask(width) {
        return Err(Error::Precondition(format!(
            "operand {name}={value} does not fit in {width} bits"
        )));
    }
    Ok(())
}

pub fn comparator_eval(a: u64, b: u64, width: u32) -> Result<ResponseVector> {
    check_operand(a, width, "a")?;
    check_operand(b, width, "b")?;
    let result = match a.cmp(&b) {
        std::cmp::Ordering::Less => CMP_LT,
        std::cmp::Ordering::Equal => CMP_EQ,
        std::cmp::Ordering::Greater => CMP_GT,
    };
    Ok(ResponseVector(vec![result]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AluOp {
    Add = 0,
    Sub = 1,
    And = 2,
    Or = 3,
}

impl AluOp {
    pub const ALL: [AluOp; 4] = [AluOp::Add, AluOp::Sub, AluOp::And, AluOp::Or];

    pub fn from_code(code: u64) -> Result<Self> {
        match code {
            0 => Ok(AluOp::Add),
            1 => Ok(AluOp::Sub),
            2 => Ok(AluOp::And),
            3 => Ok(AluOp::Or),
            other => Err(Error::Precondition(format!("invalid ALU opcode {other}"))),
        }
    }
}

pub fn golden_alu_eval(op: u64, a: u64, b: u64, width: u32) -> Result<u64> {
    let op = AluOp::from_code(op)?;
    check_operand(a, width, "a")?;
    check_operand(b, width, "b")?;
    let m = mask(width);
    Ok(match op {
        AluOp::Add => a.wrapping_add(b) & m,
        AluOp::Sub => a.wrapping_sub(b) & m,
        AluOp::And => a & b,
        AluOp::Or => a | b,
    })
}

/// The golden ALU with one injected defect: subtracting equal operands
/// yields 1.
pub fn buggy_alu_eval(op: u64, a: u64, b: u64, width: u32) -> Result<u64> {
    let golden = golden_alu_eval(op, a, b, width)?;
    if op == AluOp::Sub as u64 && a == b {
        Ok(1)
    } else {
        Ok(golden)
    }
}

pub fn check(dut_response: &ResponseVector, golden_response: &ResponseVector) -> Result<TestStatus> {
    if dut_response.0.len() != golden_response.0.len() {
        return Err(Error::Structural(format!(
            "responses have {} and {} ports",
            dut_response.0.len(),
            golden_response.0.len()
        )));
    }
    Ok(if dut_response == golden_response {
        TestStatus::Pass
    } else {
        TestStatus::Fail
    })
}

/// A device that can be simulated one transaction at a time.
pub trait Dut: Send + Sync {
    fn spec(&self) -> &DutSpec;

    fn eval(&self, stimulus: &StimulusVector) -> Result<ResponseVector>;

    /// Response of the trusted reference model.
    fn golden(&self, stimulus: &StimulusVector) -> Result<ResponseVector>;

    /// Applies one stimulus and scores it against the golden model.
    fn transact(&self, stimulus: &StimulusVector) -> Result<(ResponseVector, TestStatus)> {
        self.spec().validate_stimulus(stimulus)?;
        let response = self.eval(stimulus)?;
        let expected = self.golden(stimulus)?;
        let status = check(&response, &expected)?;
        Ok((response, status))
    }
}

/// `result = cmp(a, b)` for two `width`-bit operands.
#[derive(Debug, Clone)]
pub struct Comparator {
    spec: DutSpec,
    width: u32,
}

impl Comparator {
    pub fn new(width: u32) -> Result<Self> {
        let spec = DutSpec::new(
            "comparator",
            vec![PortSpec::input("a", width), PortSpec::input("b", width)],
            vec![PortSpec::output("result", 2)],
        )?;
        Ok(Comparator { spec, width })
    }
}

impl Dut for Comparator {
    fn spec(&self) -> &DutSpec {
        &self.spec
    }

    fn eval(&self, stimulus: &StimulusVector) -> Result<ResponseVector> {
        self.spec.validate_stimulus(stimulus)?;
        comparator_eval(stimulus.0[0], stimulus.0[1], self.width)
    }

    fn golden(&self, stimulus: &StimulusVector) -> Result<ResponseVector> {
        self.eval(stimulus)
    }
}

/// Four-function ALU with ports `op` (2 bits), `a`, `b` and `result`.
#[derive(Debug, Clone)]
pub struct Alu {
    spec: DutSpec,
    width: u32,
    buggy: bool,
}

impl Alu {
    /// The ALU carrying the injected SUB defect.
    pub fn buggy(width: u32) -> Result<Self> {
        Self::build(width, true)
    }

    /// A defect-free ALU; it never fails its check.
    pub fn correct(width: u32) -> Result<Self> {
        Self::build(width, false)
    }

    fn build(width: u32, buggy: bool) -> Result<Self> {
        let spec = DutSpec::new(
            "alu",
            vec![
                PortSpec::input("op", 2),
                PortSpec::input("a", width),
                PortSpec::input("b", width),
            ],
            vec![PortSpec::output("result", width)],
        )?;
        Ok(Alu { spec, width, buggy })
    }
}

impl Dut for Alu {
    fn spec(&self) -> &DutSpec {
        &self.spec
    }

    fn eval(&self, stimulus: &StimulusVector) -> Result<ResponseVector> {
        self.spec.validate_stimulus(stimulus)?;
        let [op, a, b] = [stimulus.0[0], stimulus.0[1], stimulus.0[2]];
        let result = if self.buggy {
            buggy_alu_eval(op, a, b, self.width)?
        } else {
            golden_alu_eval(op, a, b, self.width)?
        };
        Ok(ResponseVector(vec![result]))
    }

    fn golden(&self, stimulus: &StimulusVector) -> Result<ResponseVector> {
        self.spec.validate_stimulus(stimulus)?;
        let result = golden_alu_eval(stimulus.0[0], stimulus.0[1], stimulus.0[2], self.width)?;
        Ok(ResponseVector(vec![result]))
    }
}

/// DUT selection by name, as used on the command line and in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DutKind {
    Comparator,
    Alu,
}

impl DutKind {
    /// Builds the DUT. `alu` is always the buggy variant.
    pub fn build(self, width: u32) -> Result<Box<dyn Dut>> {
        Ok(match self {
            DutKind::Comparator => Box::new(Comparator::new(width)?),
            DutKind::Alu => Box::new(Alu::buggy(width)?),
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DutKind::Comparator => "comparator",
            DutKind::Alu => "alu",
        }
    }
}

impl fmt::Display for DutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DutKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "comparator" => Ok(DutKind::Comparator),
            "alu" => Ok(DutKind::Alu),
            other => Err(Error::Config(format!("unknown DUT `{other}`"))),
        }
    }
}
