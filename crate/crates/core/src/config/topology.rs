use super::{parse_int, strip_comment, ConfigError};

pub const NUM_QUBITS: u8 = 7;
pub const NUM_PAIRS: usize = 16;

/// Undirected couplings of the seven-qubit device used by the built-in ordering.
const DEFAULT_EDGES: [(u8, u8); 8] = [
    (0, 2),
    (0, 3),
    (1, 3),
    (1, 4),
    (2, 5),
    (3, 5),
    (3, 6),
    (4, 6),
];

/// The 16 allowed directed qubit pairs and their SMIT mask bit indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    pairs: [(u8, u8); NUM_PAIRS],
}

impl Default for Topology {
    /// Bit `2e` is edge `e` as listed, bit `2e + 1` the reversed direction.
    fn default() -> Self {
        let mut pairs = [(0, 0); NUM_PAIRS];
        for (e, &(a, b)) in DEFAULT_EDGES.iter().enumerate() {
            pairs[2 * e] = (a, b);
            pairs[2 * e + 1] = (b, a);
        }
        Self { pairs }
    }
}

impl Topology {
    /// Parses `pair <index> <source> <target>` lines; all 16 indices required.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut slots: [Option<(u8, u8)>; NUM_PAIRS] = [None; NUM_PAIRS];
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            last_line = line_no;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [kw, index, source, target] = fields[..] else {
                return Err(ConfigError::new(line_no, format!("malformed topology line `{line}`")));
            };
            if !kw.eq_ignore_ascii_case("pair") {
                return Err(ConfigError::new(line_no, format!("unknown keyword `{kw}`")));
            }
            let num = |s: &str| {
                parse_int(s).ok_or_else(|| ConfigError::new(line_no, format!("invalid number `{s}`")))
            };
            let (index, source, target) = (num(index)?, num(source)?, num(target)?);
            if index >= NUM_PAIRS as u64 {
                return Err(ConfigError::new(line_no, format!("pair index {index} outside 0..15")));
            }
            for q in [source, target] {
                if q >= NUM_QUBITS as u64 {
                    return Err(ConfigError::new(line_no, format!("qubit {q} outside 0..6")));
                }
            }
            if source == target {
                return Err(ConfigError::new(line_no, format!("pair ({source}, {target}) uses one qubit twice")));
            }
            let pair = (source as u8, target as u8);
            if slots[index as usize].is_some() {
                return Err(ConfigError::new(line_no, format!("duplicate pair index {index}")));
            }
            if slots.contains(&Some(pair)) {
                return Err(ConfigError::new(line_no, format!("duplicate pair ({source}, {target})")));
            }
            slots[index as usize] = Some(pair);
        }
        let mut pairs = [(0, 0); NUM_PAIRS];
        for (i, slot) in slots.iter().enumerate() {
            pairs[i] = slot.ok_or_else(|| ConfigError::new(last_line, format!("missing pair index {i}")))?;
        }
        Ok(Self { pairs })
    }

    pub fn pair_index(&self, source: u8, target: u8) -> Option<u8> {
        self.pairs
            .iter()
            .position(|&p| p == (source, target))
            .map(|i| i as u8)
    }

    pub fn pair(&self, index: u8) -> Option<(u8, u8)> {
        self.pairs.get(index as usize).copied()
    }

    pub fn pairs(&self) -> &[(u8, u8); NUM_PAIRS] {
        &self.pairs
    }

    pub fn to_text(&self) -> String {
        self.pairs
            .iter()
            .enumerate()
            .map(|(i, (s, t))| format!("pair {i} {s} {t}\n"))
            .collect()
    }
}
