//! Benchmark model builders: Sudoku, Max-Cut, Santa Claus and magic squares.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{AlldifferentMode, ConstraintSpec, Model, Relation, Sense, VarId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("unknown benchmark {0:?} (expected sudoku, maxcut, santa or magic)")]
    UnknownBenchmark(String),
    #[error("line {line}: {message}")]
    EdgeList { line: usize, message: String },
    #[error("{0}")]
    BadSize(String),
}

/// 4×4 puzzle with ten givens; its only completion is 1234/3412/2143/4321.
pub const SUDOKU_4X4: [&str; 4] = ["123.", ".4.2", "21.3", ".3.1"];
pub const SUDOKU_4X4_SOLUTION: [&str; 4] = ["1234", "3412", "2143", "4321"];

/// A well-known easy 9×9 puzzle.
pub const SUDOKU_9X9: [&str; 9] = [
    "53..7....",
    "6..195...",
    ".98....6.",
    "8...6...3",
    "4..8.3..1",
    "7...2...6",
    ".6....28.",
    "...419..5",
    "....8..79",
];

pub const SUDOKU_9X9_SOLUTION: [&str; 9] = [
    "534678912",
    "672195348",
    "198342567",
    "859761423",
    "426853791",
    "713924856",
    "961537284",
    "287419635",
    "345286179",
];

/// Sudoku over an n×n grid (n a perfect square). Givens (`1..=9`, `.` for empty)
/// become singleton domains. Variables are named `x{row}_{col}`.
pub fn sudoku(rows: &[&str], mode: AlldifferentMode) -> Result<Model, BenchError> {
    let n = rows.len();
    let b = (n as f64).sqrt().round() as usize;
    if b * b != n || n == 0 || rows.iter().any(|r| r.chars().count() != n) {
        return Err(BenchError::BadSize(format!("sudoku grid must be n×n with square n, got {n} rows")));
    }
    let mut m = Model::new();
    let mut cells = vec![vec![]; n];
    for (r, row) in rows.iter().enumerate() {
        for (c, ch) in row.chars().enumerate() {
            let domain: Vec<i64> = match ch.to_digit(10) {
                Some(d) if d >= 1 && d as usize <= n => vec![d as i64],
                _ => (1..=n as i64).collect(),
            };
            cells[r].push(m.add_int_var_named(format!("x{r}_{c}"), domain).expect("unique names"));
        }
    }
    let mut groups: Vec<Vec<VarId>> = Vec::new();
    for i in 0..n {
        groups.push(cells[i].clone());
        groups.push((0..n).map(|r| cells[r][i]).collect());
        let (br, bc) = (i / b * b, i % b * b);
        groups.push((0..n).map(|k| cells[br + k / b][bc + k % b]).collect());
    }
    for vars in groups {
        m.post(ConstraintSpec::Alldifferent { vars, mode }).expect("valid alldifferent");
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize, i64)>,
}

impl Graph {
    pub fn cycle(n: usize) -> Graph {
        Graph { n, edges: (0..n).map(|i| (i, (i + 1) % n, 1)).collect() }
    }

    /// Each pair is an edge with probability `density`; weights uniform in `[-100, 100]`.
    pub fn random(n: usize, density: f64, seed: u64) -> Graph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(density) {
                    edges.push((i, j, rng.gen_range(-100..=100)));
                }
            }
        }
        Graph { n, edges }
    }

    /// Lines `u v w` with 0-based vertices; blank lines and `#` comments are skipped.
    pub fn parse_edge_list(text: &str) -> Result<Graph, BenchError> {
        let mut edges = Vec::new();
        let mut n = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| BenchError::EdgeList { line: i + 1, message: message.to_string() };
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [u, v, w] = parts.as_slice() else { return Err(err("expected `u v w`")) };
            let u: usize = u.parse().map_err(|_| err("bad vertex"))?;
            let v: usize = v.parse().map_err(|_| err("bad vertex"))?;
            let w: i64 = w.parse().map_err(|_| err("bad weight"))?;
            if u == v {
                return Err(err("self-loop"));
            }
            n = n.max(u + 1).max(v + 1);
            edges.push((u, v, w));
        }
        Ok(Graph { n, edges })
    }

    pub fn cut_weight(&self, side: &[bool]) -> i64 {
        self.edges.iter().filter(|&&(u, v, _)| side[u] != side[v]).map(|e| e.2).sum()
    }
}

/// Max-Cut with vertex variables in {-1, 1} and one product `z = x_u * x_v` per edge.
///
/// The cut weight is `sum w (1 - z) / 2`, so the objective is
/// `max sum (-w/2) z + (sum w)/2`.
pub fn maxcut(g: &Graph) -> Model {
    let mut m = Model::new();
    let xs: Vec<VarId> = (0..g.n).map(|i| m.add_int_var_named(format!("x{i}"), [-1, 1]).expect("unique")).collect();
    let mut terms = Vec::new();
    let mut total = 0i64;
    for (k, &(u, v, w)) in g.edges.iter().enumerate() {
        let z = m.add_int_var_named(format!("z{k}_{u}_{v}"), [-1, 1]).expect("unique");
        m.post(ConstraintSpec::Product { x: xs[u], y: xs[v], z }).expect("valid product");
        terms.push((-(w as f64) / 2.0, z));
        total += w;
    }
    m.set_objective_with_constant(Sense::Maximize, terms, total as f64 / 2.0).expect("valid objective");
    m
}

/// Best cut over all 2^(n-1) bipartitions (vertex 0 fixed on one side).
pub fn maxcut_brute_force(g: &Graph) -> i64 {
    if g.n == 0 {
        return 0;
    }
    (0u64..1 << (g.n - 1))
        .map(|mask| {
            let side: Vec<bool> = (0..g.n).map(|i| i > 0 && mask >> (i - 1) & 1 == 1).collect();
            g.cut_weight(&side)
        })
        .max()
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SantaInstance {
    pub kids: usize,
    pub prices: Vec<i64>,
}

impl SantaInstance {
    pub fn random(kids: usize, gifts: usize, max_price: i64, seed: u64) -> SantaInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SantaInstance { kids, prices: (0..gifts).map(|_| rng.gen_range(1..=max_price)).collect() }
    }
}

/// Each kid gets a distinct gift; minimize the deviation of the chosen prices.
///
/// `g_k` is a gift index, `p_k = prices[g_k]` by Element, and
/// `Deviation(p, z, s)` with continuous mean `z` and objective `min s`.
pub fn santa(inst: &SantaInstance) -> Result<Model, BenchError> {
    let gifts = inst.prices.len();
    if inst.kids < 2 || inst.kids > gifts {
        return Err(BenchError::BadSize(format!("need 2 <= kids <= gifts, got {} kids, {gifts} gifts", inst.kids)));
    }
    let max = *inst.prices.iter().max().expect("gifts > 0");
    let min = *inst.prices.iter().min().expect("gifts > 0");
    let mut m = Model::new();
    let idx: Vec<VarId> =
        (0..inst.kids).map(|k| m.add_int_var_named(format!("gift{k}"), 0..gifts as i64).expect("unique")).collect();
    let price: Vec<VarId> = (0..inst.kids)
        .map(|k| m.add_int_var_named(format!("price{k}"), inst.prices.iter().copied()).expect("unique"))
        .collect();
    let z = m.add_num_var_named("mean", min as f64, max as f64).expect("finite bounds");
    let s = m.add_num_var_named("dev", 0.0, (inst.kids as i64 * (max - min)) as f64).expect("finite bounds");
    m.post(ConstraintSpec::Alldifferent { vars: idx.clone(), mode: AlldifferentMode::AdHocGcc }).expect("valid");
    for k in 0..inst.kids {
        m.post(ConstraintSpec::Element { index: idx[k], value: price[k], array: inst.prices.clone(), base: 0 })
            .expect("valid");
    }
    m.post(ConstraintSpec::Deviation { vars: price, mean: z, dev: s }).expect("valid");
    m.set_objective(Sense::Minimize, vec![(1.0, s)]).expect("valid");
    Ok(m)
}

/// Smallest deviation over every injective kid-to-gift assignment.
pub fn santa_brute_force(inst: &SantaInstance) -> f64 {
    fn rec(inst: &SantaInstance, used: &mut Vec<bool>, chosen: &mut Vec<i64>, best: &mut f64) {
        if chosen.len() == inst.kids {
            let mean = chosen.iter().sum::<i64>() as f64 / chosen.len() as f64;
            let dev: f64 = chosen.iter().map(|&p| (p as f64 - mean).abs()).sum();
            *best = best.min(dev);
            return;
        }
        for g in 0..inst.prices.len() {
            if !used[g] {
                used[g] = true;
                chosen.push(inst.prices[g]);
                rec(inst, used, chosen, best);
                chosen.pop();
                used[g] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(inst, &mut vec![false; inst.prices.len()], &mut Vec::new(), &mut best);
    best
}

/// n×n magic square over `1..=n²` with rows, columns and diagonals summing to `n(n²+1)/2`.
pub fn magic_square(n: usize) -> Result<Model, BenchError> {
    if !(3..=5).contains(&n) {
        return Err(BenchError::BadSize(format!("magic square size must be 3..=5, got {n}")));
    }
    let mut m = Model::new();
    let top = (n * n) as i64;
    let cells: Vec<Vec<VarId>> = (0..n)
        .map(|r| (0..n).map(|c| m.add_int_var_named(format!("m{r}_{c}"), 1..=top).expect("unique")).collect())
        .collect();
    let all: Vec<VarId> = cells.iter().flatten().copied().collect();
    m.post(ConstraintSpec::Alldifferent { vars: all, mode: AlldifferentMode::AdHocGcc }).expect("valid");
    let target = (n * (n * n + 1) / 2) as f64;
    let mut lines: Vec<Vec<VarId>> = cells.clone();
    lines.extend((0..n).map(|c| cells.iter().map(|row| row[c]).collect::<Vec<_>>()));
    lines.push((0..n).map(|i| cells[i][i]).collect());
    lines.push((0..n).map(|i| cells[i][n - 1 - i]).collect());
    for line in lines {
        let terms = line.into_iter().map(|v| (1.0, v)).collect();
        m.post(ConstraintSpec::Linear { terms, relation: Relation::Eq, rhs: target }).expect("valid");
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BenchArgs {
    pub n: Option<usize>,
    pub seed: Option<u64>,
}

/// Builds a named benchmark. `n` is the grid side for sudoku (4 or 9), the
/// vertex count for maxcut, the number of kids for santa and the side for magic.
pub fn build(name: &str, args: BenchArgs) -> Result<Model, BenchError> {
    let seed = args.seed.unwrap_or(1);
    match name {
        "sudoku" => match args.n.unwrap_or(9) {
            4 => sudoku(&SUDOKU_4X4, AlldifferentMode::AdHocGcc),
            9 => sudoku(&SUDOKU_9X9, AlldifferentMode::AdHocGcc),
            n => Err(BenchError::BadSize(format!("sudoku size must be 4 or 9, got {n}"))),
        },
        "maxcut" => {
            let n = args.n.unwrap_or(10);
            if n > 24 {
                return Err(BenchError::BadSize(format!("maxcut supports at most 24 vertices, got {n}")));
            }
            Ok(maxcut(&Graph::random(n, 0.5, seed)))
        }
        "santa" => {
            let kids = args.n.unwrap_or(3);
            santa(&SantaInstance::random(kids, kids + 2, 25, seed))
        }
        "magic" => magic_square(args.n.unwrap_or(3)),
        other => Err(BenchError::UnknownBenchmark(other.to_string())),
    }
}

/// The desk-scale benchmark suite, by name.
pub fn suite() -> Vec<(String, Model)> {
    let mut out = vec![
        ("sudoku4".to_string(), build("sudoku", BenchArgs { n: Some(4), seed: None }).unwrap()),
        ("sudoku9".to_string(), build("sudoku", BenchArgs { n: Some(9), seed: None }).unwrap()),
        ("maxcut-c5".to_string(), maxcut(&Graph::cycle(5))),
        ("santa-3-5".to_string(), build("santa", BenchArgs { n: Some(3), seed: Some(1) }).unwrap()),
        ("magic3".to_string(), magic_square(3).unwrap()),
    ];
    for seed in 1..=2 {
        out.push((format!("maxcut-8-s{seed}"), maxcut(&Graph::random(8, 0.5, seed))));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builders_validate() {
        for (name, m) in suite() {
            assert!(m.validate().is_empty(), "{name}");
            let back = crate::modelfile::parse_model(&crate::modelfile::write_model(&m)).unwrap();
            assert_eq!(back, m, "{name}");
        }
        assert!(matches!(build("knapsack", BenchArgs::default()), Err(BenchError::UnknownBenchmark(_))));
    }

    #[test]
    fn edge_list_parsing() {
        let g = Graph::parse_edge_list("# c5\n0 1 1\n1 2 1\n\n2 3 -4\n").unwrap();
        assert_eq!(g.n, 4);
        assert_eq!(g.edges[2], (2, 3, -4));
        assert!(matches!(Graph::parse_edge_list("0 1"), Err(BenchError::EdgeList { line: 1, .. })));
    }

    #[test]
    fn brute_force_references() {
        assert_eq!(maxcut_brute_force(&Graph::cycle(5)), 4);
        assert_eq!(maxcut_brute_force(&Graph::cycle(4)), 4);
        let inst = SantaInstance { kids: 3, prices: vec![10, 11, 30, 12, 1] };
        assert!((santa_brute_force(&inst) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sudoku_fixture_is_consistent() {
        for (given, solved) in SUDOKU_9X9.iter().zip(SUDOKU_9X9_SOLUTION) {
            assert!(given.chars().zip(solved.chars()).all(|(g, s)| g == '.' || g == s));
        }
        for (given, solved) in SUDOKU_4X4.iter().zip(SUDOKU_4X4_SOLUTION) {
            assert!(given.chars().zip(solved.chars()).all(|(g, s)| g == '.' || g == s));
        }
    }
}
