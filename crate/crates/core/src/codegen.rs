//! Hardware targets.
//!
//! Two emitters turn a chip into something a device can hold:
//!
//! * [`write_rule_image`] produces the rule memory of the 16-rule, 4-input,
//!   2-output min-max inference chip as a fixed 776-byte `.fzc` image.
//! * [`gen_table`] precomputes the chip's outputs for every quantized input
//!   state so a plain memory chip can serve them by address. The table is
//!   written as text with [`emit_table`] (`.tbl`) or packed with
//!   [`emit_table_binary`] (`.bin`).
//!
//! # `.fzc` layout
//!
//! | offset | size | content                                   |
//! |--------|------|-------------------------------------------|
//! | 0      | 4    | magic `FZC1`                              |
//! | 4      | 1    | format version (1)                        |
//! | 5      | 1    | number of real rules (0..=16)             |
//! | 6      | 2    | reserved, zero                            |
//! | 8      | 768  | 16 rule slots of 48 bytes                 |
//!
//! A slot holds antecedents X1..X4 then consequents Y1..Y2, 8 bytes each.
//! Within a membership function, level `2i` is the low nibble of byte `i`
//! and level `2i + 1` the high nibble. Unused positions carry ANY (inputs)
//! or NULL (outputs); unused slots are ANY x4 + NULL x2, which can never
//! contribute under max-min composition.

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{ChipObject, ChipType};
use crate::membership::{MembershipFunction, TruthLevel, Universe, LEVELS};

pub const IMAGE_MAGIC: [u8; 4] = *b"FZC1";
pub const IMAGE_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 8;
pub const SLOT_COUNT: usize = 16;
pub const SLOT_INPUTS: usize = 4;
pub const SLOT_OUTPUTS: usize = 2;
pub const MF_BYTES: usize = LEVELS / 2;
pub const SLOT_BYTES: usize = (SLOT_INPUTS + SLOT_OUTPUTS) * MF_BYTES;
pub const IMAGE_LEN: usize = HEADER_LEN + SLOT_COUNT * SLOT_BYTES;

/// Largest input count whose address space fits in 2^24 entries.
pub const MAX_TABLE_INPUTS: usize = 6;
pub const MAX_BYTESIZE: u8 = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodegenError {
    #[error("inference-chip target needs a MINMAX chip, {chip} is {kind}")]
    NotMinMax { chip: String, kind: ChipType },
    #[error("inference chip supports max {max} {what}, chip {chip} has {got}")]
    Capacity {
        chip: String,
        what: &'static str,
        max: usize,
        got: usize,
    },
    #[error("memory-chip tables support max {MAX_TABLE_INPUTS} inputs (2^24 addresses), chip has {0}")]
    TableTooLarge(usize),
    #[error("bytesize must be 0 (real outputs) or 1..=16, got {0}")]
    BadByteSize(u32),
    #[error("binary tables need integer outputs (bytesize 1..=16)")]
    RealBinary,
    #[error("not a rule image: {0}")]
    BadImage(String),
    #[error("line {line}: {message}")]
    TableParse { line: usize, message: String },
}

/// The bit-exact rule memory of an inference chip.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChipImage {
    bytes: Vec<u8>,
}

/// One decoded rule slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageSlot {
    pub antecedent: [MembershipFunction; SLOT_INPUTS],
    pub consequent: [MembershipFunction; SLOT_OUTPUTS],
}

impl ImageSlot {
    pub const PADDING: ImageSlot = ImageSlot {
        antecedent: [MembershipFunction::ANY; SLOT_INPUTS],
        consequent: [MembershipFunction::NULL; SLOT_OUTPUTS],
    };
}

fn pack(mf: &MembershipFunction, out: &mut Vec<u8>) {
    for pair in mf.levels().chunks_exact(2) {
        out.push(pair[0] | (pair[1] << 4));
    }
}

fn unpack(bytes: &[u8]) -> MembershipFunction {
    let mut levels = [0 as TruthLevel; LEVELS];
    for (i, b) in bytes.iter().enumerate() {
        levels[2 * i] = b & 0x0F;
        levels[2 * i + 1] = b >> 4;
    }
    MembershipFunction::new(levels).expect("nibbles are always within 0..=15")
}

impl ChipImage {
    /// Validates header and length.
    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self, CodegenError> {
        if bytes.len() != IMAGE_LEN {
            return Err(CodegenError::BadImage(format!(
                "expected {IMAGE_LEN} bytes, got {}",
                bytes.len()
            )));
        }
        if bytes[..4] != IMAGE_MAGIC {
            return Err(CodegenError::BadImage("bad magic".into()));
        }
        if bytes[4] != IMAGE_VERSION {
            return Err(CodegenError::BadImage(format!("unsupported version {}", bytes[4])));
        }
        if bytes[5] as usize > SLOT_COUNT {
            return Err(CodegenError::BadImage(format!("rule count {} exceeds {SLOT_COUNT}", bytes[5])));
        }
        if bytes[6] != 0 || bytes[7] != 0 {
            return Err(CodegenError::BadImage("reserved header bytes are not zero".into()));
        }
        Ok(ChipImage { bytes })
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn rule_count(&self) -> usize {
        self.bytes[5] as usize
    }

    /// All 16 slots, padding included.
    pub fn slots(&self) -> Vec<ImageSlot> {
        self.bytes[HEADER_LEN..]
            .chunks_exact(SLOT_BYTES)
            .map(|slot| {
                let mut mfs = slot.chunks_exact(MF_BYTES).map(unpack);
                ImageSlot {
                    antecedent: std::array::from_fn(|_| mfs.next().expect("slot has 4 antecedents")),
                    consequent: std::array::from_fn(|_| mfs.next().expect("slot has 2 consequents")),
                }
            })
            .collect()
    }
}

fn capacity(chip: &ChipObject, what: &'static str, max: usize, got: usize) -> Result<(), CodegenError> {
    if got > max {
        return Err(CodegenError::Capacity {
            chip: chip.name().to_string(),
            what,
            max,
            got,
        });
    }
    Ok(())
}

/// Lays a min-max chip's rules out in inference-chip memory format.
pub fn write_rule_image(chip: &ChipObject) -> Result<ChipImage, CodegenError> {
    if chip.kind() != ChipType::MinMax {
        return Err(CodegenError::NotMinMax {
            chip: chip.name().to_string(),
            kind: chip.kind(),
        });
    }
    capacity(chip, "inputs", SLOT_INPUTS, chip.input_count())?;
    capacity(chip, "outputs", SLOT_OUTPUTS, chip.output_count())?;
    capacity(chip, "rules", SLOT_COUNT, chip.rule_count())?;

    let mut bytes = Vec::with_capacity(IMAGE_LEN);
    bytes.extend_from_slice(&IMAGE_MAGIC);
    bytes.push(IMAGE_VERSION);
    bytes.push(chip.rule_count() as u8);
    bytes.extend_from_slice(&[0, 0]);
    let rules = chip.compiled().rules();
    for slot in 0..SLOT_COUNT {
        let rule = rules.get(slot);
        for i in 0..SLOT_INPUTS {
            let mf = rule
                .and_then(|r| r.antecedent.get(i))
                .unwrap_or(&MembershipFunction::ANY);
            pack(mf, &mut bytes);
        }
        for o in 0..SLOT_OUTPUTS {
            let mf = rule
                .and_then(|r| r.consequent.get(o))
                .unwrap_or(&MembershipFunction::NULL);
            pack(mf, &mut bytes);
        }
    }
    debug_assert_eq!(bytes.len(), IMAGE_LEN);
    Ok(ChipImage { bytes })
}

/// Input levels packed into an address, input 0 in the low nibble.
pub fn encode_address(levels: &[TruthLevel]) -> u32 {
    levels
        .iter()
        .rev()
        .fold(0u32, |acc, &l| (acc << 4) | (l as u32 & 0xF))
}

pub fn decode_address(address: u32, inputs: usize) -> Vec<TruthLevel> {
    (0..inputs).map(|k| ((address >> (4 * k)) & 0xF) as TruthLevel).collect()
}

/// `round((y - lo) / (hi - lo) * (2^bits - 1))`, clamped to the code range.
pub fn quantize_output(y: f64, u: &Universe, bits: u8) -> u16 {
    let top = ((1u32 << bits) - 1) as f64;
    ((y - u.lo()) / u.width() * top).round().clamp(0.0, top) as u16
}

/// Physical value represented by an integer table code.
pub fn dequantize_output(code: u16, u: &Universe, bits: u8) -> f64 {
    let top = ((1u32 << bits) - 1) as f64;
    u.lo() + code as f64 / top * u.width()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TableValue {
    Real(f64),
    Code(u16),
}

impl std::fmt::Display for TableValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            // Debug keeps a decimal point and round-trips exactly
            TableValue::Real(v) => write!(f, "{v:?}"),
            TableValue::Code(c) => write!(f, "{c}"),
        }
    }
}

/// Output values in address order, `output_count` per address.
#[derive(Debug, Clone, PartialEq)]
pub enum TableValues {
    Real(Vec<f64>),
    Code(Vec<u16>),
}

/// The memory-chip address table: every input state and its outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct AddressTable {
    input_count: usize,
    output_count: usize,
    bytesize: u8,
    values: TableValues,
    no_activation: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub address: u32,
    pub levels: Vec<TruthLevel>,
    pub outputs: Vec<TableValue>,
}

impl AddressTable {
    pub fn input_count(&self) -> usize {
        self.input_count
    }

    pub fn output_count(&self) -> usize {
        self.output_count
    }

    pub fn bytesize(&self) -> u8 {
        self.bytesize
    }

    pub fn row_count(&self) -> usize {
        1 << (4 * self.input_count)
    }

    pub fn values(&self) -> &TableValues {
        &self.values
    }

    /// Addresses where no rule fired and the output universe midpoint was
    /// stored instead.
    pub fn no_activation(&self) -> &[u32] {
        &self.no_activation
    }

    pub fn value(&self, address: u32, output: usize) -> TableValue {
        let i = address as usize * self.output_count + output;
        match &self.values {
            TableValues::Real(v) => TableValue::Real(v[i]),
            TableValues::Code(v) => TableValue::Code(v[i]),
        }
    }

    pub fn row(&self, address: u32) -> TableRow {
        TableRow {
            address,
            levels: decode_address(address, self.input_count),
            outputs: (0..self.output_count).map(|o| self.value(address, o)).collect(),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = TableRow> + '_ {
        (0..self.row_count() as u32).map(|a| self.row(a))
    }

    /// Same header and values; the NO-ACTIVATION report is not compared.
    pub fn same_contents(&self, other: &AddressTable) -> bool {
        self.input_count == other.input_count
            && self.output_count == other.output_count
            && self.bytesize == other.bytesize
            && self.values == other.values
    }
}

/// Evaluates the chip at every quantized input state.
pub fn gen_table(chip: &ChipObject, bytesize: u32) -> Result<AddressTable, CodegenError> {
    if bytesize > MAX_BYTESIZE as u32 {
        return Err(CodegenError::BadByteSize(bytesize));
    }
    let bits = bytesize as u8;
    let inputs = chip.input_count();
    if inputs == 0 || inputs > MAX_TABLE_INPUTS {
        return Err(CodegenError::TableTooLarge(inputs));
    }
    let outputs = chip.output_count();
    let universes: Vec<Universe> = chip.compiled().outputs().iter().map(|d| d.universe).collect();
    let rows = 1usize << (4 * inputs);

    let mut reals = vec![0.0f64; rows * outputs];
    let mut dead = vec![false; rows];
    reals
        .par_chunks_mut(outputs)
        .zip(dead.par_iter_mut())
        .enumerate()
        .for_each(|(address, (slot, dead))| {
            let levels = decode_address(address as u32, inputs);
            let inference = chip.infer_levels(&levels).expect("decoded levels match chip arity");
            for ((out, crisp), u) in slot.iter_mut().zip(&inference.outputs).zip(&universes) {
                *out = match crisp.value() {
                    Some(y) => y,
                    None => {
                        *dead = true;
                        u.midpoint()
                    }
                };
            }
        });

    let values = if bits == 0 {
        TableValues::Real(reals)
    } else {
        TableValues::Code(
            reals
                .chunks_exact(outputs)
                .flat_map(|row| row.iter().zip(&universes).map(|(&y, u)| quantize_output(y, u, bits)))
                .collect(),
        )
    };
    let no_activation = dead
        .iter()
        .enumerate()
        .filter(|(_, &d)| d)
        .map(|(a, _)| a as u32)
        .collect();
    Ok(AddressTable {
        input_count: inputs,
        output_count: outputs,
        bytesize: bits,
        values,
        no_activation,
    })
}

/// Text form: a header line, then one tab-separated row per address.
pub fn emit_table(t: &AddressTable) -> String {
    let mut out = String::with_capacity(t.row_count() * (8 + 4 * t.input_count + 20 * t.output_count));
    let _ = writeln!(
        out,
        "INPUT {}  OUTPUT {}  BYTESIZE {}",
        t.input_count, t.output_count, t.bytesize
    );
    for row in t.rows() {
        let _ = write!(out, "{}", row.address);
        for l in &row.levels {
            let _ = write!(out, "\t{l}");
        }
        for v in &row.outputs {
            let _ = write!(out, "\t{v}");
        }
        out.push('\n');
    }
    out
}

/// Packs integer outputs little-endian, `ceil(bytesize / 8)` bytes each.
pub fn emit_table_binary(t: &AddressTable) -> Result<Vec<u8>, CodegenError> {
    let codes = match &t.values {
        TableValues::Code(c) => c,
        TableValues::Real(_) => return Err(CodegenError::RealBinary),
    };
    let width = (t.bytesize as usize).div_ceil(8);
    let mut out = Vec::with_capacity(codes.len() * width);
    for &c in codes {
        out.extend_from_slice(&c.to_le_bytes()[..width]);
    }
    Ok(out)
}

/// Reads the text form back. The NO-ACTIVATION report is not part of the
/// text and comes back empty.
pub fn parse_table(text: &str) -> Result<AddressTable, CodegenError> {
    let err = |line: usize, message: String| CodegenError::TableParse { line, message };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty table".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let number = |key: &str, i: usize| -> Result<usize, CodegenError> {
        match (fields.get(i), fields.get(i + 1)) {
            (Some(k), Some(v)) if k.eq_ignore_ascii_case(key) => {
                v.parse().map_err(|_| err(1, format!("bad {key} value {v:?}")))
            }
            _ => Err(err(1, format!("expected {key} <n> in header"))),
        }
    };
    let inputs = number("INPUT", 0)?;
    let outputs = number("OUTPUT", 2)?;
    let bytesize = number("BYTESIZE", 4)?;
    if fields.len() != 6 {
        return Err(err(1, "trailing fields in header".into()));
    }
    if inputs == 0 || inputs > MAX_TABLE_INPUTS {
        return Err(err(1, format!("unsupported input count {inputs}")));
    }
    if bytesize > MAX_BYTESIZE as usize {
        return Err(err(1, format!("unsupported bytesize {bytesize}")));
    }
    let rows = 1usize << (4 * inputs);
    let mut reals = Vec::new();
    let mut codes = Vec::new();
    let mut seen = 0usize;
    for (idx, line) in lines {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 1 + inputs + outputs {
            return Err(err(lineno, format!("expected {} fields, got {}", 1 + inputs + outputs, fields.len())));
        }
        let address: usize = fields[0]
            .parse()
            .map_err(|_| err(lineno, format!("bad address {:?}", fields[0])))?;
        if address != seen {
            return Err(err(lineno, format!("expected address {seen}, got {address}")));
        }
        let expected = decode_address(address as u32, inputs);
        for (k, f) in fields[1..=inputs].iter().enumerate() {
            if f.parse::<TruthLevel>().ok() != Some(expected[k]) {
                return Err(err(lineno, format!("input {k} of address {address} should be {}", expected[k])));
            }
        }
        for f in &fields[1 + inputs..] {
            if bytesize == 0 {
                reals.push(f.parse::<f64>().map_err(|_| err(lineno, format!("bad real {f:?}")))?);
            } else {
                let code: u32 = f.parse().map_err(|_| err(lineno, format!("bad integer {f:?}")))?;
                if code >= 1 << bytesize {
                    return Err(err(lineno, format!("{code} does not fit in {bytesize} bits")));
                }
                codes.push(code as u16);
            }
        }
        seen += 1;
    }
    if seen != rows {
        return Err(err(text.lines().count(), format!("expected {rows} rows, got {seen}")));
    }
    Ok(AddressTable {
        input_count: inputs,
        output_count: outputs,
        bytesize: bytesize as u8,
        values: if bytesize == 0 {
            TableValues::Real(reals)
        } else {
            TableValues::Code(codes)
        },
        no_activation: Vec::new(),
    })
}
