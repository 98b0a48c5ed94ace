//! The 4x4 worked example: `n1 = 5`, `n2 = 6`, `k = 4` over `F_11`, with
//! explicit systematic generators `G1` and `G2`. `G1` is MDS. `G2` has one
//! singular minor, so Type 2 reconstruction from nodes {2,3,5,6} fails.

use crate::field::PrimeField;
use crate::matrix::FieldMatrix;
use crate::mds::MdsCode;
use crate::secure::{random_symbols, SecureLayout};
use crate::twin::{NodeType, TwinConfig};

pub const Q: u64 = 11;
pub const K: usize = 4;

pub fn field() -> PrimeField {
    PrimeField::new(Q).expect("11 is prime")
}

pub fn example_g1() -> FieldMatrix {
    FieldMatrix::from_rows(
        field(),
        &[[1, 0, 0, 0, 1], [0, 1, 0, 0, 1], [0, 0, 1, 0, 1], [0, 0, 0, 1, 1]],
    )
    .expect("rectangular")
}

pub fn example_g2() -> FieldMatrix {
    FieldMatrix::from_rows(
        field(),
        &[
            [1, 0, 0, 1, 1, 1],
            [0, 1, 0, 1, 4, 3],
            [0, 0, 1, 1, 3, 4],
            [0, 0, 0, 1, 2, 2],
        ],
    )
    .expect("rectangular")
}

/// The twin configuration built from the two explicit generators.
pub fn config() -> TwinConfig {
    let c1 = MdsCode::from_generator(example_g1()).expect("G1 is MDS");
    let c2 = MdsCode::from_generator_unchecked(example_g2()).expect("4x6");
    TwinConfig::new(c1, c2).expect("same field and dimension")
}

/// The `(l1, l2) = (2, 0)` layout: keys `r1..r8` in columns 1-2, payload
/// `a9..a16` in columns 3-4. Key and payload values are drawn from `seed`.
pub fn layout(seed: u64) -> SecureLayout {
    let payload = random_symbols(field(), 8, seed ^ 0x9e37_79b9_7f4a_7c15);
    SecureLayout::new(field(), &payload, K, 2, 0, seed).expect("valid layout")
}

/// Stored symbols of every node under [`layout`], one cell per symbol, in
/// the `r_1 + 4r_2` notation of the printed table.
pub const NODE_TABLE: [(NodeType, usize, [&str; 4]); 11] = [
    (NodeType::One, 1, ["r_1", "r_2", "r_3", "r_4"]),
    (NodeType::One, 2, ["r_5", "r_6", "r_7", "r_8"]),
    (NodeType::One, 3, ["a_9", "a_{10}", "a_{11}", "a_{12}"]),
    (NodeType::One, 4, ["a_{13}", "a_{14}", "a_{15}", "a_{16}"]),
    (
        NodeType::One,
        5,
        [
            "r_1 + r_5 + a_9 + a_{13}",
            "r_2 + r_6 + a_{10} + a_{14}",
            "r_3 + r_7 + a_{11} + a_{15}",
            "r_4 + r_8 + a_{12} + a_{16}",
        ],
    ),
    (NodeType::Two, 1, ["r_1", "r_5", "a_9", "a_{13}"]),
    (NodeType::Two, 2, ["r_2", "r_6", "a_{10}", "a_{14}"]),
    (NodeType::Two, 3, ["r_3", "r_7", "a_{11}", "a_{15}"]),
    (
        NodeType::Two,
        4,
        [
            "r_1 + r_2 + r_3 + r_4",
            "r_5 + r_6 + r_7 + r_8",
            "a_9 + a_{10} + a_{11} + a_{12}",
            "a_{13} + a_{14} + a_{15} + a_{16}",
        ],
    ),
    (
        NodeType::Two,
        5,
        [
            "r_1 + 4r_2 + 3r_3 + 2r_4",
            "r_5 + 4r_6 + 3r_7 + 2r_8",
            "a_9 + 4a_{10} + 3a_{11} + 2a_{12}",
            "a_{13} + 4a_{14} + 3a_{15} + 2a_{16}",
        ],
    ),
    (
        NodeType::Two,
        6,
        [
            "r_1 + 3r_2 + 4r_3 + 2r_4",
            "r_5 + 3r_6 + 4r_7 + 2r_8",
            "a_9 + 3a_{10} + 4a_{11} + 2a_{12}",
            "a_{13} + 3a_{14} + 4a_{15} + 2a_{16}",
        ],
    ),
];

/// Drops spaces, underscores and braces: `a_{10}` becomes `a10`.
pub fn plain_cell(cell: &str) -> String {
    cell.chars().filter(|c| !matches!(c, ' ' | '_' | '{' | '}')).collect()
}
