//! The 24 vertices of the 2-2-2 no-signalling polytope: 8 PR boxes and
//! 16 local deterministic points.

use crate::behavior::{hardy_probs, idx, Behavior};

/// Row shape of a PR box at one setting pair: perfectly correlated
/// (`[½,0,0,½]` over `++,+−,−+,−−`) or anticorrelated (`[0,½,½,0]`).
#[derive(Clone, Copy)]
enum Row {
    C,
    A,
}
use Row::{A, C};

// Rows for (X1Y1, X1Y2, X2Y1, X2Y2).
const PR_ROWS: [[Row; 4]; 8] = [
    [C, C, C, A],
    [A, A, A, C],
    [C, C, A, C],
    [A, A, C, A],
    [C, A, C, C],
    [A, C, A, A],
    [A, C, C, C],
    [C, A, A, A],
];

// Outcome pair at (X1Y1, X1Y2, X2Y1, X2Y2); b'+' / b'-'.
// LD 9's last row is printed as "1 0 1 0" in the source tables, which is not a
// distribution. The unique deterministic completion of its other rows is −+.
const LD_ROWS: [[&[u8; 2]; 4]; 16] = [
    [b"++", b"++", b"++", b"++"],
    [b"+-", b"+-", b"+-", b"+-"],
    [b"-+", b"-+", b"-+", b"-+"],
    [b"--", b"--", b"--", b"--"],
    [b"++", b"+-", b"++", b"+-"],
    [b"+-", b"++", b"+-", b"++"],
    [b"-+", b"--", b"-+", b"--"],
    [b"--", b"-+", b"--", b"-+"],
    [b"++", b"++", b"-+", b"-+"],
    [b"+-", b"+-", b"--", b"--"],
    [b"-+", b"-+", b"++", b"++"],
    [b"--", b"--", b"+-", b"+-"],
    [b"++", b"+-", b"-+", b"--"],
    [b"+-", b"++", b"--", b"-+"],
    [b"-+", b"--", b"++", b"+-"],
    [b"--", b"-+", b"+-", b"++"],
];

const PAIRS: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

const fn outcome(c: u8) -> usize {
    if c == b'+' {
        0
    } else {
        1
    }
}

/// PR box `k`, `1 ≤ k ≤ 8`.
pub fn pr_box(k: usize) -> Behavior {
    assert!((1..=8).contains(&k), "PR box index {k} out of 1..=8");
    let mut p = [0.0; 16];
    for (r, &(x, y)) in PR_ROWS[k - 1].iter().zip(PAIRS.iter()) {
        let (i, j) = match r {
            C => ((0, 0), (1, 1)),
            A => ((0, 1), (1, 0)),
        };
        p[idx(x, y, i.0, i.1)] = 0.5;
        p[idx(x, y, j.0, j.1)] = 0.5;
    }
    Behavior::from_array_unchecked(p)
}

/// Local deterministic point `k`, `1 ≤ k ≤ 16`.
pub fn ld(k: usize) -> Behavior {
    assert!((1..=16).contains(&k), "LD index {k} out of 1..=16");
    let mut p = [0.0; 16];
    for (r, &(x, y)) in LD_ROWS[k - 1].iter().zip(PAIRS.iter()) {
        p[idx(x, y, outcome(r[0]), outcome(r[1]))] = 1.0;
    }
    Behavior::from_array_unchecked(p)
}

#[derive(Debug, Clone)]
pub struct VertexCatalog {
    pub pr: [Behavior; 8],
    pub ld: [Behavior; 16],
}

impl VertexCatalog {
    pub fn new() -> Self {
        VertexCatalog {
            pr: core::array::from_fn(|i| pr_box(i + 1)),
            ld: core::array::from_fn(|i| ld(i + 1)),
        }
    }

    /// PR boxes first, then LD points.
    pub fn all(&self) -> [Behavior; 24] {
        core::array::from_fn(|i| if i < 8 { self.pr[i] } else { self.ld[i - 8] })
    }

    pub fn label(i: usize) -> (&'static str, usize) {
        if i < 8 {
            ("PR", i + 1)
        } else {
            ("LD", i - 7)
        }
    }
}

impl Default for VertexCatalog {
    fn default() -> Self {
        Self::new()
    }
}

/// LD labels spanning the Hardy face together with PR box 1.
pub const HARDY_LD: [usize; 5] = [4, 8, 12, 14, 15];
/// LD labels spanning the CL face (zeros `p₂ = p₃ = 0`) together with PR box 1.
pub const CL_LD: [usize; 9] = [1, 4, 6, 8, 11, 12, 14, 15, 16];

/// True when `b` satisfies every Hardy zero exactly.
pub fn on_hardy_face(b: &Behavior) -> bool {
    let [_, p2, p3, p4] = hardy_probs(b);
    p2 == 0.0 && p3 == 0.0 && p4 == 0.0
}
