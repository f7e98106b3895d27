//! Seeded instance families for benchmarks and differential testing.
//!
//! Every family is a pure function of `(family, n, seed)`: the same triple
//! always yields byte-identical script text.  Sizes are capped at 64 soft
//! clauses per objective, and the shapes stay small enough that the
//! brute-force oracle can still certify instances with at most a dozen
//! softs.
//!
//! * `example1` — `n` unit-weight softs `(not A_i)` under hard clauses
//!   forcing at least two of the `A_i` true, so the optimum is always 2;
//!   the seed permutes soft and clause order.  Once a solver learns the
//!   first cost bound, every frame setting two further `A_i` is excluded
//!   purely by the bound, which makes the family a propagation stress
//!   test for attached networks.
//! * `weight1` — `n` unit-weight soft literals plus `n` random hard
//!   3-clauses over the soft indicators and two rational variables.
//! * `lex-pb` — two or three pure soft-group objectives minimized
//!   lexicographically.
//! * `maxmin` — the same shape optimized for the best worst group.
//! * `lmt-mixed` — a soft group plus a linear term over two rational
//!   variables in one objective, with fractional weights.

use crate::ast::{Command, Op, STerm, Script};
use omtlite::core::Rational;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Family {
    Example1,
    Weight1,
    LexPb,
    MaxMin,
    LmtMixed,
}

impl Family {
    pub fn all() -> [Family; 5] {
        [Family::Example1, Family::Weight1, Family::LexPb, Family::MaxMin, Family::LmtMixed]
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Example1 => "example1",
            Family::Weight1 => "weight1",
            Family::LexPb => "lex-pb",
            Family::MaxMin => "maxmin",
            Family::LmtMixed => "lmt-mixed",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::all()
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

/// Instance id used in benchmark rows and file names.
pub fn instance_name(family: Family, n: usize, seed: u64) -> String {
    format!("{}-n{n}-s{seed}", family.name())
}

struct Rng(u64);

impl Rng {
    fn new(seed: u64) -> Rng {
        Rng(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1))
    }

    fn next(&mut self) -> u32 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 33) as u32
    }

    fn below(&mut self, n: usize) -> usize {
        self.next() as usize % n.max(1)
    }

    fn flip(&mut self) -> bool {
        self.next() & 1 == 1
    }

    fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

fn sym(name: impl Into<String>) -> STerm {
    STerm::Sym(name.into())
}

fn num(n: i64) -> STerm {
    STerm::Num(Rational::from_int(n))
}

fn app(op: Op, args: Vec<STerm>) -> STerm {
    STerm::App(op, args)
}

fn negated_if(t: STerm, flag: bool) -> STerm {
    if flag {
        app(Op::Not, vec![t])
    } else {
        t
    }
}

fn declare(script: &mut Vec<Command>, prefix: &str, count: usize, sort: crate::ast::Sort) {
    for i in 0..count {
        script.push(Command::DeclareFun { name: format!("{prefix}{i}"), sort });
    }
}

fn soft(term: STerm, weight: Rational, id: &str) -> Command {
    Command::AssertSoft { term, weight, id: id.to_owned() }
}

fn queries(script: &mut Vec<Command>) {
    script.push(Command::CheckSat);
    script.push(Command::GetObjectives);
    script.push(Command::GetModel);
}

fn example1(n: usize, rng: &mut Rng) -> Vec<Command> {
    assert!((2..=64).contains(&n), "example1 needs 2 <= n <= 64");
    let mut script = Vec::new();
    declare(&mut script, "A", n, crate::ast::Sort::Bool);
    let mut soft_order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut soft_order);
    for &i in &soft_order {
        script.push(soft(app(Op::Not, vec![sym(format!("A{i}"))]), Rational::one(), "cost"));
    }
    let mut clause_order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut clause_order);
    for &skip in &clause_order {
        let mut lits: Vec<STerm> =
            (0..n).filter(|&j| j != skip).map(|j| sym(format!("A{j}"))).collect();
        let rot = rng.below(lits.len());
        lits.rotate_left(rot);
        script.push(Command::Assert(if lits.len() == 1 {
            lits.pop().unwrap()
        } else {
            app(Op::Or, lits)
        }));
    }
    script.push(Command::Minimize(sym("cost")));
    queries(&mut script);
    script
}

/// Pool of linear-atom templates over `x0` and `x1`.
fn atom_pool(rng: &mut Rng) -> Vec<STerm> {
    let c = |rng: &mut Rng| num(rng.below(5) as i64 - 2);
    vec![
        app(Op::Le, vec![sym("x0"), c(rng)]),
        app(Op::Gt, vec![app(Op::Add, vec![sym("x0"), sym("x1")]), c(rng)]),
        app(Op::Lt, vec![sym("x1"), c(rng)]),
        app(Op::Ge, vec![app(Op::Sub, vec![sym("x0"), sym("x1")]), c(rng)]),
    ]
}

fn weight1(n: usize, rng: &mut Rng) -> Vec<Command> {
    assert!((1..=64).contains(&n), "weight1 needs 1 <= n <= 64");
    let mut script = Vec::new();
    declare(&mut script, "B", n, crate::ast::Sort::Bool);
    declare(&mut script, "x", 2, crate::ast::Sort::Real);
    for i in 0..n {
        let polarity = rng.flip();
        script.push(soft(negated_if(sym(format!("B{i}")), polarity), Rational::one(), "cost"));
    }
    let atoms = atom_pool(rng);
    for _ in 0..n {
        let mut lits = Vec::new();
        for _ in 0..3 {
            let lit = if rng.below(3) == 0 {
                atoms[rng.below(atoms.len())].clone()
            } else {
                sym(format!("B{}", rng.below(n)))
            };
            lits.push(negated_if(lit, rng.flip()));
        }
        script.push(Command::Assert(app(Op::Or, lits)));
    }
    script.push(Command::Minimize(sym("cost")));
    queries(&mut script);
    script
}

fn pb_multi(n: usize, rng: &mut Rng, priority: &str) -> Vec<Command> {
    assert!((2..=64).contains(&n), "multi-objective families need 2 <= n <= 64");
    let objectives = 2 + rng.below(2);
    let mut script = vec![Command::SetOption {
        key: ":opt.priority".to_owned(),
        value: priority.to_owned(),
    }];
    declare(&mut script, "B", n, crate::ast::Sort::Bool);
    let weights = ["1", "2", "3", "1/2"];
    for obj in 0..objectives {
        let id = format!("o{obj}");
        for _ in 0..n {
            let term = if rng.below(3) == 0 && n >= 2 {
                let a = rng.below(n);
                let b = (a + 1 + rng.below(n - 1)) % n;
                app(
                    Op::Or,
                    vec![
                        negated_if(sym(format!("B{a}")), rng.flip()),
                        negated_if(sym(format!("B{b}")), rng.flip()),
                    ],
                )
            } else {
                negated_if(sym(format!("B{}", rng.below(n))), rng.flip())
            };
            let weight: Rational = weights[rng.below(weights.len())].parse().unwrap();
            script.push(soft(term, weight, &id));
        }
    }
    for _ in 0..n / 2 + 1 {
        let len = 2 + rng.below(2);
        let lits = (0..len)
            .map(|_| negated_if(sym(format!("B{}", rng.below(n))), rng.flip()))
            .collect();
        script.push(Command::Assert(app(Op::Or, lits)));
    }
    for obj in 0..objectives {
        script.push(Command::Minimize(sym(format!("o{obj}"))));
    }
    queries(&mut script);
    script
}

fn lmt_mixed(n: usize, rng: &mut Rng) -> Vec<Command> {
    assert!((1..=64).contains(&n), "lmt-mixed needs 1 <= n <= 64");
    let mut script = Vec::new();
    declare(&mut script, "B", n, crate::ast::Sort::Bool);
    declare(&mut script, "x", 2, crate::ast::Sort::Real);
    let weights = ["1", "1/2", "3/2", "2", "5/4"];
    for i in 0..n {
        let weight: Rational = weights[rng.below(weights.len())].parse().unwrap();
        script.push(soft(negated_if(sym(format!("B{i}")), rng.flip()), weight, "cost"));
    }
    script.push(Command::Assert(app(Op::Le, vec![num(0), sym("x0")])));
    script.push(Command::Assert(app(Op::Le, vec![sym("x0"), num(10)])));
    script.push(Command::Assert(app(Op::Le, vec![num(-5), sym("x1")])));
    script.push(Command::Assert(app(Op::Le, vec![sym("x1"), num(5)])));
    let atoms = atom_pool(rng);
    for _ in 0..n.div_ceil(2) {
        let lits = vec![
            negated_if(sym(format!("B{}", rng.below(n))), rng.flip()),
            negated_if(atoms[rng.below(atoms.len())].clone(), rng.flip()),
        ];
        script.push(Command::Assert(app(Op::Or, lits)));
    }
    let scale = ["1/2", "1/4", "1"][rng.below(3)];
    script.push(Command::Minimize(app(
        Op::Add,
        vec![
            sym("cost"),
            app(Op::Mul, vec![STerm::Num(scale.parse().unwrap()), sym("x0")]),
            sym("x1"),
        ],
    )));
    queries(&mut script);
    script
}

/// Builds the scripted instance for `(family, n, seed)`.
pub fn generate(family: Family, n: usize, seed: u64) -> Script {
    let tag = match family {
        Family::Example1 => 1,
        Family::Weight1 => 2,
        Family::LexPb => 3,
        Family::MaxMin => 4,
        Family::LmtMixed => 5,
    };
    let mut rng = Rng::new(seed ^ (tag as u64) << 56 ^ (n as u64) << 40);
    let commands = match family {
        Family::Example1 => example1(n, &mut rng),
        Family::Weight1 => weight1(n, &mut rng),
        Family::LexPb => pb_multi(n, &mut rng, "lex"),
        Family::MaxMin => pb_multi(n, &mut rng, "maxmin"),
        Family::LmtMixed => lmt_mixed(n, &mut rng),
    };
    Script::from_commands(commands)
}
