use std::fmt;

/// Named generators of the coefficient field. Vertex and edge fields hold
/// display labels; oriented edges print as `e` or `-e`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// Taylor coefficient `n` of the varied differential at the chart of `edge`;
    /// `n = 0` is the node value.
    Xi { edge: String, n: u32 },
    /// Regular bidifferential evaluated at two nodes of a positive-genus vertex.
    Beta { vertex: String, from: String, to: String },
    /// Constant (`zeta^0`) kernel coefficients, `z^a` part.
    Kappa { vertex: String, from: String, to: String, a: u32 },
    /// Generic kernel coefficient `z^a zeta^b` at a positive-genus vertex.
    Kernel { vertex: String, from: String, to: String, a: u32, b: u32 },
    /// `(1/b!) d^b/dzeta^b (2 pi i K_v)(z, q_e + zeta)` at `zeta = 0`, a
    /// differential in `z`. For `b = 1` this is `b_v(z, q_e)`.
    KernelDiff { vertex: String, edge: String, b: u32 },
    /// `(1/m!) d^m` of the B-period of `b_v(z, q_e)` in the node position.
    BPeriod { cycle: u32, edge: String, m: u32 },
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Xi { edge, n: 0 } => write!(f, "xi[{edge}]"),
            Symbol::Xi { edge, n } => write!(f, "xi[{edge};{n}]"),
            Symbol::Beta { vertex, from, to } => write!(f, "beta[{vertex};{from},{to}]"),
            Symbol::Kappa { vertex, from, to, a } => write!(f, "kappa[{vertex};{from},{to};{a}]"),
            Symbol::Kernel { vertex, from, to, a, b } => write!(f, "K[{vertex};{from},{to};{a},{b}]"),
            Symbol::KernelDiff { vertex, edge, b: 1 } => write!(f, "b[{vertex}](z,q[{edge}])"),
            Symbol::KernelDiff { vertex, edge, b } => write!(f, "dK[{vertex};{edge};{b}]"),
            Symbol::BPeriod { cycle, edge, m: 0 } => write!(f, "B[{cycle};{edge}]"),
            Symbol::BPeriod { cycle, edge, m } => write!(f, "B[{cycle};{edge};{m}]"),
        }
    }
}
