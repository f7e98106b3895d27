//! S-expression reader for the script language.
//!
//! Three stages: a lexer producing parenthesis and atom tokens with line
//! and column positions, a reader folding tokens into nested expressions,
//! and a command parser mapping each top-level expression to a
//! [`Command`].  Atoms that parse as rational literals (`5`, `-2/3`,
//! `1.25`) become numerals; everything else is a symbol.  Errors carry
//! the position of the offending token and are split by kind: malformed
//! syntax, references to undeclared symbols, sort mismatches (raised
//! during lowering), duplicate declarations, and constructs outside the
//! supported fragment.

use crate::ast::{Command, Op, Pos, STerm, Script, Sort, Spanned};
use omtlite::core::Rational;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ErrorKind {
    Syntax(String),
    UnknownSymbol(String),
    SortMismatch { expected: &'static str, found: String },
    Duplicate(String),
    Unsupported(String),
}

/// Any frontend failure: parse, sort, or lowering.
#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub struct FrontError {
    pub pos: Pos,
    pub kind: ErrorKind,
}

impl FrontError {
    pub fn new(pos: Pos, kind: ErrorKind) -> FrontError {
        FrontError { pos, kind }
    }

    pub fn syntax(pos: Pos, msg: impl Into<String>) -> FrontError {
        FrontError::new(pos, ErrorKind::Syntax(msg.into()))
    }
}

impl fmt::Display for FrontError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.pos)?;
        match &self.kind {
            ErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ErrorKind::UnknownSymbol(name) => write!(f, "unknown symbol `{name}`"),
            ErrorKind::SortMismatch { expected, found } => {
                write!(f, "sort mismatch: expected {expected}, found {found}")
            }
            ErrorKind::Duplicate(name) => write!(f, "duplicate declaration of `{name}`"),
            ErrorKind::Unsupported(msg) => write!(f, "unsupported: {msg}"),
        }
    }
}

#[derive(Clone, Debug)]
enum SExp {
    Atom(String, Pos),
    List(Vec<SExp>, Pos),
}

impl SExp {
    fn pos(&self) -> Pos {
        match self {
            SExp::Atom(_, p) | SExp::List(_, p) => *p,
        }
    }
}

struct Token {
    text: String,
    pos: Pos,
}

fn lex(input: &str) -> Result<Vec<Token>, FrontError> {
    let mut tokens = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = input.chars().peekable();
    while let Some(&ch) = chars.peek() {
        let pos = Pos { line, col };
        match ch {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' | ')' => {
                chars.next();
                col += 1;
                tokens.push(Token { text: ch.to_string(), pos });
            }
            _ => {
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    if !is_symbol_char(c) {
                        return Err(FrontError::syntax(
                            Pos { line, col },
                            format!("invalid character `{c}`"),
                        ));
                    }
                    text.push(c);
                    chars.next();
                    col += 1;
                }
                tokens.push(Token { text, pos });
            }
        }
    }
    Ok(tokens)
}

fn is_symbol_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/:".contains(c)
}

fn read_all(tokens: &[Token]) -> Result<Vec<SExp>, FrontError> {
    let mut stack: Vec<(Vec<SExp>, Pos)> = Vec::new();
    let mut top = Vec::new();
    for tok in tokens {
        match tok.text.as_str() {
            "(" => stack.push((Vec::new(), tok.pos)),
            ")" => match stack.pop() {
                Some((items, pos)) => {
                    let exp = SExp::List(items, pos);
                    match stack.last_mut() {
                        Some((parent, _)) => parent.push(exp),
                        None => top.push(exp),
                    }
                }
                None => return Err(FrontError::syntax(tok.pos, "unexpected `)`")),
            },
            _ => {
                let exp = SExp::Atom(tok.text.clone(), tok.pos);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(exp),
                    None => top.push(exp),
                }
            }
        }
    }
    if let Some((_, pos)) = stack.last() {
        return Err(FrontError::syntax(*pos, "unclosed `(`"));
    }
    Ok(top)
}

/// True when `text` reads as a rational literal rather than a symbol.
pub fn is_numeral(text: &str) -> bool {
    text.parse::<Rational>().is_ok()
}

fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with(':')
        && !is_numeral(name)
        && name != "true"
        && name != "false"
        && Op::from_name(name).is_none()
        && name.chars().all(is_symbol_char)
}

fn parse_term(exp: &SExp) -> Result<STerm, FrontError> {
    match exp {
        SExp::Atom(text, pos) => {
            if text == "true" {
                return Ok(STerm::True);
            }
            if text == "false" {
                return Ok(STerm::False);
            }
            if let Ok(r) = text.parse::<Rational>() {
                return Ok(STerm::Num(r));
            }
            if text.starts_with(':') {
                return Err(FrontError::syntax(*pos, format!("keyword `{text}` is not a term")));
            }
            Ok(STerm::Sym(text.clone()))
        }
        SExp::List(items, pos) => {
            let Some((head, args)) = items.split_first() else {
                return Err(FrontError::syntax(*pos, "empty term"));
            };
            let SExp::Atom(name, head_pos) = head else {
                return Err(FrontError::syntax(head.pos(), "operator must be a symbol"));
            };
            let Some(op) = Op::from_name(name) else {
                return Err(FrontError::syntax(
                    *head_pos,
                    format!("unknown operator `{name}`"),
                ));
            };
            let (lo, hi) = op.arity();
            if args.len() < lo || hi.is_some_and(|h| args.len() > h) {
                return Err(FrontError::syntax(
                    *head_pos,
                    format!("`{name}` expects {} argument(s), got {}", arity_text(lo, hi), args.len()),
                ));
            }
            let args = args.iter().map(parse_term).collect::<Result<Vec<_>, _>>()?;
            Ok(STerm::App(op, args))
        }
    }
}

fn arity_text(lo: usize, hi: Option<usize>) -> String {
    match hi {
        Some(h) if h == lo => format!("{lo}"),
        Some(h) => format!("{lo} to {h}"),
        None => format!("at least {lo}"),
    }
}

fn expect_atom<'a>(exp: &'a SExp, what: &str) -> Result<(&'a str, Pos), FrontError> {
    match exp {
        SExp::Atom(text, pos) => Ok((text, *pos)),
        SExp::List(_, pos) => Err(FrontError::syntax(*pos, format!("expected {what}"))),
    }
}

fn parse_command(items: &[SExp], pos: Pos) -> Result<Command, FrontError> {
    let Some((head, args)) = items.split_first() else {
        return Err(FrontError::syntax(pos, "empty command"));
    };
    let (name, head_pos) = expect_atom(head, "a command name")?;
    let fixed_arity = |want: usize| -> Result<(), FrontError> {
        if args.len() != want {
            return Err(FrontError::syntax(
                head_pos,
                format!("`{name}` expects {want} argument(s), got {}", args.len()),
            ));
        }
        Ok(())
    };
    match name {
        "declare-fun" => {
            fixed_arity(3)?;
            let (fun, fun_pos) = expect_atom(&args[0], "a symbol")?;
            if !is_valid_name(fun) {
                return Err(FrontError::syntax(fun_pos, format!("invalid symbol `{fun}`")));
            }
            match &args[1] {
                SExp::List(params, _) if params.is_empty() => {}
                other => {
                    return Err(FrontError::new(
                        other.pos(),
                        ErrorKind::Unsupported("only constant declarations are supported".into()),
                    ))
                }
            }
            let (sort, sort_pos) = expect_atom(&args[2], "a sort")?;
            let sort = match sort {
                "Bool" => Sort::Bool,
                "Real" => Sort::Real,
                other => {
                    return Err(FrontError::syntax(sort_pos, format!("unknown sort `{other}`")))
                }
            };
            Ok(Command::DeclareFun { name: fun.to_owned(), sort })
        }
        "assert" => {
            fixed_arity(1)?;
            Ok(Command::Assert(parse_term(&args[0])?))
        }
        "assert-soft" => {
            let Some((term, rest)) = args.split_first() else {
                return Err(FrontError::syntax(head_pos, "`assert-soft` expects a term"));
            };
            let term = parse_term(term)?;
            let mut weight = Rational::one();
            let mut id = "I".to_owned();
            let mut rest = rest.iter();
            while let Some(key) = rest.next() {
                let (key, key_pos) = expect_atom(key, "a keyword")?;
                let Some(value) = rest.next() else {
                    return Err(FrontError::syntax(key_pos, format!("`{key}` needs a value")));
                };
                match key {
                    ":weight" => {
                        let (text, val_pos) = expect_atom(value, "a rational")?;
                        let w: Rational = text.parse().map_err(|_| {
                            FrontError::syntax(val_pos, format!("invalid weight `{text}`"))
                        })?;
                        if !w.is_positive() {
                            return Err(FrontError::syntax(
                                val_pos,
                                "soft weight must be positive",
                            ));
                        }
                        weight = w;
                    }
                    ":id" => {
                        let (text, val_pos) = expect_atom(value, "a symbol")?;
                        if !is_valid_name(text) {
                            return Err(FrontError::syntax(
                                val_pos,
                                format!("invalid objective id `{text}`"),
                            ));
                        }
                        id = text.to_owned();
                    }
                    other => {
                        return Err(FrontError::syntax(
                            key_pos,
                            format!("unknown attribute `{other}`"),
                        ))
                    }
                }
            }
            Ok(Command::AssertSoft { term, weight, id })
        }
        "minimize" => {
            fixed_arity(1)?;
            Ok(Command::Minimize(parse_term(&args[0])?))
        }
        "maximize" => {
            fixed_arity(1)?;
            Ok(Command::Maximize(parse_term(&args[0])?))
        }
        "check-sat" => {
            fixed_arity(0)?;
            Ok(Command::CheckSat)
        }
        "get-objectives" => {
            fixed_arity(0)?;
            Ok(Command::GetObjectives)
        }
        "get-model" => {
            fixed_arity(0)?;
            Ok(Command::GetModel)
        }
        "set-option" => {
            fixed_arity(2)?;
            let (key, key_pos) = expect_atom(&args[0], "an option keyword")?;
            if !key.starts_with(':') {
                return Err(FrontError::syntax(key_pos, "option name must start with `:`"));
            }
            let (value, _) = expect_atom(&args[1], "an option value")?;
            Ok(Command::SetOption { key: key.to_owned(), value: value.to_owned() })
        }
        "exit" => {
            fixed_arity(0)?;
            Ok(Command::Exit)
        }
        other => Err(FrontError::syntax(head_pos, format!("unknown command `{other}`"))),
    }
}

/// Parses a full script.
pub fn parse_script(input: &str) -> Result<Script, FrontError> {
    let tokens = lex(input)?;
    let exps = read_all(&tokens)?;
    let mut commands = Vec::new();
    for exp in &exps {
        match exp {
            SExp::List(items, pos) => {
                commands.push(Spanned { node: parse_command(items, *pos)?, pos: *pos })
            }
            SExp::Atom(text, pos) => {
                return Err(FrontError::syntax(
                    *pos,
                    format!("expected a command, found `{text}`"),
                ))
            }
        }
    }
    Ok(Script { commands })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(text: &str) {
        let script = parse_script(text).unwrap();
        let printed = script.to_string();
        let reparsed = parse_script(&printed).unwrap();
        assert_eq!(script.nodes(), reparsed.nodes());
        assert_eq!(printed, reparsed.to_string());
    }

    #[test]
    fn parses_a_full_script() {
        let text = "\
; sample
(set-option :opt.priority lex)
(declare-fun A () Bool)
(declare-fun x () Real)
(assert (or A (<= x 1)))
(assert-soft (not A) :weight 1/3 :id cost)
(assert-soft A :id cost)
(minimize cost)
(check-sat)
(get-objectives)
(get-model)
(exit)
";
        let script = parse_script(text).unwrap();
        assert_eq!(script.commands.len(), 11);
        assert_eq!(
            script.commands[4].node,
            Command::AssertSoft {
                term: STerm::App(Op::Not, vec![STerm::Sym("A".into())]),
                weight: Rational::new(1, 3).unwrap(),
                id: "cost".into(),
            }
        );
        assert_eq!(
            script.commands[5].node,
            Command::AssertSoft {
                term: STerm::Sym("A".into()),
                weight: Rational::one(),
                id: "cost".into(),
            }
        );
        roundtrip(text);
    }

    #[test]
    fn parses_numerals_in_every_form() {
        let script = parse_script("(assert (< (+ x -2/3 1.25 (- 4)) 7))").unwrap();
        let Command::Assert(STerm::App(Op::Lt, args)) = &script.commands[0].node else {
            panic!("shape");
        };
        let STerm::App(Op::Add, sum) = &args[0] else { panic!("shape") };
        assert_eq!(sum[1], STerm::Num(Rational::new(-2, 3).unwrap()));
        assert_eq!(sum[2], STerm::Num(Rational::new(5, 4).unwrap()));
        assert_eq!(sum[3], STerm::App(Op::Sub, vec![STerm::Num(Rational::from_int(4))]));
    }

    #[test]
    fn reports_syntax_error_position() {
        let err = parse_script("(assert (and A)\n(assert B)").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, col: 1 });
        assert!(matches!(err.kind, ErrorKind::Syntax(_)));

        let err = parse_script("(assert x))").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, col: 11 });

        let err = parse_script("(declare-fun y () Int)").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, col: 19 });
        assert!(matches!(err.kind, ErrorKind::Syntax(ref m) if m.contains("unknown sort")));
    }

    #[test]
    fn rejects_bad_weights_and_arities() {
        let err = parse_script("(assert-soft A :weight 0)").unwrap_err();
        assert!(matches!(err.kind, ErrorKind::Syntax(ref m) if m.contains("positive")));
        let err = parse_script("(assert-soft A :weight x)").unwrap_err();
        assert!(matches!(err.kind, ErrorKind::Syntax(ref m) if m.contains("invalid weight")));
        let err = parse_script("(assert (not A B))").unwrap_err();
        assert!(matches!(err.kind, ErrorKind::Syntax(ref m) if m.contains("expects 1")));
        let err = parse_script("(check-sat now)").unwrap_err();
        assert!(matches!(err.kind, ErrorKind::Syntax(ref m) if m.contains("expects 0")));
    }

    #[test]
    fn rejects_non_constant_declarations() {
        let err = parse_script("(declare-fun f (Bool) Bool)").unwrap_err();
        assert!(matches!(err.kind, ErrorKind::Unsupported(_)));
    }

    #[test]
    fn default_soft_attributes() {
        let script = parse_script("(assert-soft A)").unwrap();
        assert_eq!(
            script.commands[0].node,
            Command::AssertSoft {
                term: STerm::Sym("A".into()),
                weight: Rational::one(),
                id: "I".into(),
            }
        );
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        roundtrip("; header\n\n(assert true) ; tail\n(check-sat)\n");
    }
}
