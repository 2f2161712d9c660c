//! Line-oriented reaction notation, e.g.
//!
//! ```text
//! 2 A -> 0 A @ 1/40
//! A + B -> C @ 1.0
//! 0 -> A @ 50        # birth
//! ```
//!
//! Statements end at a newline or `;`; `#` starts a comment.

use num_rational::BigRational;
use num_traits::Signed;

use super::{Initial, ModelError, Reaction, ReactionSystem};
use crate::scalar::parse_rational;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(u32),
    Ident(String),
    Arrow,
    At,
    Plus,
    Empty,
}

struct Lexed {
    toks: Vec<(Tok, usize)>,
    /// Column and raw text of the rate literal following `@`.
    rate: Option<(usize, String)>,
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ModelError {
    ModelError::Syntax { line, col, msg: msg.into() }
}

fn lex(stmt: &[(usize, char)], line: usize) -> Result<Lexed, ModelError> {
    let mut toks = Vec::new();
    let mut k = 0;
    while k < stmt.len() {
        let (col, c) = stmt[k];
        if c.is_whitespace() {
            k += 1;
        } else if c == '-' && stmt.get(k + 1).is_some_and(|&(_, n)| n == '>') {
            toks.push((Tok::Arrow, col));
            k += 2;
        } else if c == '→' {
            toks.push((Tok::Arrow, col));
            k += 1;
        } else if c == '+' {
            toks.push((Tok::Plus, col));
            k += 1;
        } else if c == '∅' {
            toks.push((Tok::Empty, col));
            k += 1;
        } else if c == '@' {
            toks.push((Tok::At, col));
            let rest: String = stmt[k + 1..].iter().map(|&(_, ch)| ch).collect();
            let start = stmt[k + 1..].iter().find(|(_, ch)| !ch.is_whitespace()).map_or(col + 1, |&(c2, _)| c2);
            return Ok(Lexed { toks, rate: Some((start, rest.trim().to_string())) });
        } else if c.is_ascii_digit() {
            let start = k;
            while k < stmt.len() && stmt[k].1.is_ascii_digit() {
                k += 1;
            }
            let text: String = stmt[start..k].iter().map(|&(_, ch)| ch).collect();
            let v = text.parse::<u32>().map_err(|_| syntax(line, col, format!("coefficient {text} too large")))?;
            toks.push((Tok::Int(v), col));
        } else if c.is_alphabetic() || c == '_' {
            let start = k;
            while k < stmt.len() && (stmt[k].1.is_alphanumeric() || stmt[k].1 == '_') {
                k += 1;
            }
            toks.push((Tok::Ident(stmt[start..k].iter().map(|&(_, ch)| ch).collect()), col));
        } else {
            return Err(syntax(line, col, format!("unexpected character '{c}'")));
        }
    }
    Ok(Lexed { toks, rate: None })
}

/// Parses one side into `(species, count)` pairs in textual order.
fn parse_side(toks: &[(Tok, usize)], line: usize, end_col: usize) -> Result<Vec<(String, u32)>, ModelError> {
    match toks {
        [] => return Err(syntax(line, end_col, "expected a reaction side")),
        [(Tok::Int(0), _)] | [(Tok::Empty, _)] => return Ok(Vec::new()),
        _ => {}
    }
    let mut terms = Vec::new();
    let mut k = 0;
    loop {
        let count = match toks.get(k) {
            Some((Tok::Int(v), _)) => {
                k += 1;
                *v
            }
            _ => 1,
        };
        match toks.get(k) {
            Some((Tok::Ident(name), _)) => terms.push((name.clone(), count)),
            Some((_, col)) => return Err(syntax(line, *col, "expected a species name")),
            None => return Err(syntax(line, end_col, "expected a species name")),
        }
        k += 1;
        match toks.get(k) {
            None => return Ok(terms),
            Some((Tok::Plus, _)) => k += 1,
            Some((_, col)) => return Err(syntax(line, *col, "expected '+' or the end of the side")),
        }
    }
}

struct RawReaction {
    line: usize,
    inputs: Vec<(String, u32)>,
    outputs: Vec<(String, u32)>,
    rate: BigRational,
}

fn parse_statement(stmt: &[(usize, char)], line: usize) -> Result<RawReaction, ModelError> {
    let end_col = stmt.last().map_or(1, |&(c, _)| c + 1);
    let lexed = lex(stmt, line)?;
    let toks = &lexed.toks;
    let arrow = toks
        .iter()
        .position(|(t, _)| *t == Tok::Arrow)
        .ok_or_else(|| syntax(line, toks.first().map_or(1, |t| t.1), "expected '->'"))?;
    let at = toks.iter().position(|(t, _)| *t == Tok::At).ok_or_else(|| syntax(line, end_col, "expected '@ rate'"))?;
    if let Some((_, col)) = toks[arrow + 1..at].iter().find(|(t, _)| *t == Tok::Arrow) {
        return Err(syntax(line, *col, "more than one '->'"));
    }
    if at < arrow {
        return Err(syntax(line, toks[at].1, "'@' before '->'"));
    }
    let inputs = parse_side(&toks[..arrow], line, toks[arrow].1)?;
    let outputs = parse_side(&toks[arrow + 1..at], line, toks[at].1)?;
    let (rate_col, rate_text) = lexed.rate.expect("lexer records the rate after '@'");
    if rate_text.is_empty() {
        return Err(syntax(line, rate_col, "missing rate"));
    }
    let rate = parse_rational(&rate_text).ok_or_else(|| syntax(line, rate_col, format!("invalid rate '{rate_text}'")))?;
    if rate.is_negative() {
        return Err(ModelError::NegativeRate { line, col: rate_col, rate: rate_text });
    }
    if inputs.iter().chain(&outputs).all(|(_, c)| *c == 0) {
        return Err(ModelError::EmptyReaction { line });
    }
    Ok(RawReaction { line, inputs, outputs, rate })
}

/// Parses reaction notation. Species are registered in order of first
/// appearance; the initial distribution is the empty state `|0>` until
/// replaced with [`ReactionSystem::with_initial`].
pub fn parse_dsl(text: &str) -> Result<ReactionSystem, ModelError> {
    let mut raw = Vec::new();
    for (ln, line_text) in text.lines().enumerate() {
        let line = ln + 1;
        let chars: Vec<(usize, char)> = line_text
            .chars()
            .enumerate()
            .map(|(k, c)| (k + 1, c))
            .take_while(|&(_, c)| c != '#')
            .collect();
        for stmt in chars.split(|&(_, c)| c == ';') {
            if stmt.iter().all(|(_, c)| c.is_whitespace()) {
                continue;
            }
            raw.push(parse_statement(stmt, line)?);
        }
    }
    let mut species: Vec<String> = Vec::new();
    for r in &raw {
        for (name, _) in r.inputs.iter().chain(&r.outputs) {
            if !species.contains(name) {
                species.push(name.clone());
            }
        }
    }
    if species.is_empty() {
        return Err(syntax(1, 1, "no reactions"));
    }
    let vector = |side: &[(String, u32)]| {
        let mut v = vec![0u32; species.len()];
        for (name, c) in side {
            let idx = species.iter().position(|s| s == name).expect("registered");
            v[idx] += c;
        }
        v
    };
    let mut reactions = Vec::with_capacity(raw.len());
    for r in &raw {
        let reaction = Reaction::new(vector(&r.inputs), vector(&r.outputs), r.rate.clone());
        if reaction.inputs.iter().chain(&reaction.outputs).all(|&c| c == 0) {
            return Err(ModelError::EmptyReaction { line: r.line });
        }
        reactions.push(reaction);
    }
    let zero = vec![0u32; species.len()];
    ReactionSystem::new(species, reactions, Initial::from([(zero, 1.0)]))
}

/// Canonical text form; `parse_dsl(serialize_dsl(s))` reproduces the species
/// order and reactions of `s`.
///
/// Terms are written in species order. When that order alone would register
/// species differently (or a species never has a nonzero count), the newly
/// introduced species are all listed on the input side, with explicit `0 X`
/// terms where needed.
pub fn serialize_dsl(system: &ReactionSystem) -> String {
    let species = system.species();
    let n = species.len();
    let last = system.reactions().len().saturating_sub(1);
    let mut next = 0;
    let mut out = String::new();
    for (k, r) in system.reactions().iter().enumerate() {
        let new_in: Vec<usize> = (next..n).filter(|&j| r.inputs[j] > 0).collect();
        let new_out: Vec<usize> = (next..n).filter(|&j| r.inputs[j] == 0 && r.outputs[j] > 0).collect();
        let hi = new_in.iter().chain(&new_out).copied().max().map_or(next, |m| m + 1);
        let hi = if k == last { n } else { hi };
        let natural: Vec<usize> = new_in.iter().chain(&new_out).copied().collect();
        let fits = natural.iter().copied().eq(next..hi);
        let mut in_terms = Vec::new();
        let mut out_terms = Vec::new();
        for j in 0..n {
            let forced = !fits && (next..hi).contains(&j);
            if r.inputs[j] > 0 || forced {
                in_terms.push(term(r.inputs[j], &species[j]));
            }
            if r.outputs[j] > 0 {
                out_terms.push(term(r.outputs[j], &species[j]));
            }
        }
        next = hi;
        let side = |t: Vec<String>| if t.is_empty() { "0".to_string() } else { t.join(" + ") };
        out.push_str(&format!("{} -> {} @ {}\n", side(in_terms), side(out_terms), r.rate));
    }
    out
}

fn term(count: u32, name: &str) -> String {
    if count == 1 {
        name.to_string()
    } else {
        format!("{count} {name}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_figure_style_reactions() {
        let s = parse_dsl("2 A -> 0 A @ 0.025").unwrap();
        assert_eq!(s.species(), ["A"]);
        assert_eq!(s.reactions()[0], Reaction::single(2, 0, q(1, 40)));
        let s = parse_dsl("0 A -> 1 A @ 50").unwrap();
        assert_eq!(s.reactions()[0], Reaction::single(0, 1, q(50, 1)));
        let s = parse_dsl("A + B -> C @ 1.0").unwrap();
        assert_eq!(s.species(), ["A", "B", "C"]);
        assert_eq!(s.reactions()[0], Reaction::new(vec![1, 1, 0], vec![0, 0, 1], q(1, 1)));
    }

    #[test]
    fn accepts_empty_set_comments_and_separators() {
        let s = parse_dsl("# decay chain\n∅ -> A @ 1/2 ; A -> 0 @ 3e-1\n\n2A -> A @ 7 # pair").unwrap();
        assert_eq!(s.reactions().len(), 3);
        assert_eq!(s.reactions()[0], Reaction::single(0, 1, q(1, 2)));
        assert_eq!(s.reactions()[1], Reaction::single(1, 0, q(3, 10)));
        assert_eq!(s.reactions()[2], Reaction::single(2, 1, q(7, 1)));
    }

    #[test]
    fn reports_errors_with_positions() {
        match parse_dsl("A -> B @ 1\nA -> B @ -2") {
            Err(ModelError::NegativeRate { line: 2, col: 10, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert_eq!(parse_dsl("A -> B @ 1\n0 -> 0 @ 1"), Err(ModelError::EmptyReaction { line: 2 }));
        assert_eq!(parse_dsl("0 A -> 0 A @ 1"), Err(ModelError::EmptyReaction { line: 1 }));
        match parse_dsl("A => B @ 1") {
            Err(ModelError::Syntax { line: 1, col: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_dsl("A -> B") {
            Err(ModelError::Syntax { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_dsl("A + -> B @ 1") {
            Err(ModelError::Syntax { line: 1, col: 5, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_dsl("A -> B @ fast") {
            Err(ModelError::Syntax { line: 1, col: 10, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(parse_dsl("A -> B -> C @ 1").is_err());
        assert!(parse_dsl("A -> B @ 1/0").is_err());
        assert!(parse_dsl("").is_err());
    }

    const CORPUS: &[&str] = &[
        "A -> 0 @ 4",
        "0 -> A @ 50",
        "2 A -> 0 A @ 0.025",
        "2 A -> A @ 1/10",
        "0 -> 2 A @ 25",
        "A -> 2 A @ 0.5",
        "A + B -> C @ 1.0",
        "B + A -> C @ 2; C -> A + B @ 3",
        "∅ -> X @ 1e2",
        "X -> Y @ 1\nY -> Z @ 2\nZ -> X @ 3",
        "A -> B + 0 X @ 1",
        "0 X + A -> B @ 1",
        "A -> 0 X + B @ 1",
        "3 A -> 2 B + C @ 5/7",
        "A -> A + B @ 0",
        "A + A -> B @ 1",
        "S_1 -> 2 S_2 @ 0.125",
        "A -> 0 @ 1 # comment\n# only a comment\nB -> 0 @ 2",
        "2 B -> 0 @ 1\n1 A -> 1 B @ 1",
        "C -> 0 @ 1; 0 -> B @ 2; A -> C @ 3",
        "0 C + A -> B @ 1\nB + C -> 0 @ 2",
        "0 A + B -> A @ 1",
    ];

    #[test]
    fn serialize_roundtrip_corpus() {
        for text in CORPUS {
            let s = parse_dsl(text).unwrap();
            let again = parse_dsl(&serialize_dsl(&s)).unwrap();
            assert_eq!(again, s, "{text}");
            assert_eq!(serialize_dsl(&again), serialize_dsl(&s));
        }
    }

    #[test]
    fn duplicate_terms_accumulate() {
        let s = parse_dsl("A + A -> B @ 1").unwrap();
        assert_eq!(s.reactions()[0].inputs, vec![2, 0]);
    }
}
