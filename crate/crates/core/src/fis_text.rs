//! Line-oriented text format for fuzzy inference systems.
//!
//! ```text
//! # comment
//! system <name>
//! option <and_op|or_op|implication|aggregation|defuzz|resolution> <value>
//! input <name> range <lo> <hi>
//!   label <name> tri <a> <b> <c>
//!   label <name> trap <a> <b> <c> <d>
//! output <name> range <lo> <hi>
//!   label ...
//! rule if <var> is <label> (and|or <var> is <label>)* then <var> is <label> [weight <w>]
//! ```
//!
//! `label` lines belong to the closest preceding `input`/`output` line.
//! Numbers accept scientific notation. The full grammar and the canonical
//! serialization are described in `docs/fis-format.md`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::inference::{Connective, FisBuilder, Operators};
use crate::numfmt::format_exact;
use crate::variable::is_identifier;
use crate::{
    Clause, DefinitionError, FisDefinition, FuzzyError, FuzzyRule, Label, LinguisticVariable,
    MembershipFunction,
};

/// 1-based line and column (in characters).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl Pos {
    fn new(line: usize, column: usize) -> Self {
        Self { line, column }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("input is not valid UTF-8")]
    InvalidUtf8,
    #[error("{0}")]
    Syntax(String),
    #[error("unknown option `{0}`")]
    UnknownOption(String),
    #[error("option `{0}` given more than once")]
    DuplicateOption(String),
    #[error("invalid value for option `{key}`: {message}")]
    InvalidOptionValue { key: String, message: String },
    #[error("missing `system <name>` header")]
    MissingSystem,
    #[error("`system` header given more than once")]
    DuplicateSystem,
    #[error("`label` line outside an input or output block")]
    LabelOutsideVariable,
    #[error("more than one output variable")]
    MultipleOutputs,
    #[error("{0}")]
    Variable(FuzzyError),
    #[error("{0}")]
    Definition(DefinitionError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{pos}: {kind}")]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn new(pos: Pos, kind: ParseErrorKind) -> Self {
        Self { pos, kind }
    }

    fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        Self::new(pos, ParseErrorKind::Syntax(message.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Input,
    Output,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptionLine {
    pub key: String,
    pub value: String,
    pub pos: Pos,
    pub value_pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelLine {
    pub name: String,
    pub mf: MembershipFunction,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableBlock {
    pub role: Role,
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub pos: Pos,
    pub labels: Vec<LabelLine>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleLine {
    pub rule: FuzzyRule,
    pub pos: Pos,
}

/// Syntax tree of one FIS text, positions kept for diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FisDocument {
    pub system: Option<(String, Pos)>,
    pub options: Vec<OptionLine>,
    pub variables: Vec<VariableBlock>,
    pub rules: Vec<RuleLine>,
    /// Position just past the last line, used for whole-document errors.
    pub end: Pos,
}

struct Token<'a> {
    text: &'a str,
    pos: Pos,
}

struct Line<'a> {
    tokens: Vec<Token<'a>>,
    next: usize,
    end: Pos,
}

fn tokenize(line_no: usize, line: &str) -> Line<'_> {
    let content = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut column = 0;
    for (byte, ch) in content.char_indices() {
        column += 1;
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                tokens.push(Token {
                    text: &content[b..byte],
                    pos: Pos::new(line_no, c),
                });
            }
        } else if start.is_none() {
            start = Some((byte, column));
        }
    }
    if let Some((b, c)) = start {
        tokens.push(Token {
            text: &content[b..],
            pos: Pos::new(line_no, c),
        });
    }
    Line {
        tokens,
        next: 0,
        end: Pos::new(line_no, column + 1),
    }
}

impl<'a> Line<'a> {
    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.next)
    }

    fn here(&self) -> Pos {
        self.peek().map_or(self.end, |t| t.pos)
    }

    fn take(&mut self, what: &str) -> Result<&Token<'a>, ParseError> {
        let pos = self.here();
        let tok = self
            .tokens
            .get(self.next)
            .ok_or_else(|| ParseError::syntax(pos, format!("expected {what}, found end of line")))?;
        self.next += 1;
        Ok(tok)
    }

    fn keyword(&mut self, kw: &str) -> Result<Pos, ParseError> {
        let tok = self.take(&format!("`{kw}`"))?;
        if tok.text == kw {
            Ok(tok.pos)
        } else {
            Err(ParseError::syntax(
                tok.pos,
                format!("expected `{kw}`, found `{}`", tok.text),
            ))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        let tok = self.take(what)?;
        if is_identifier(tok.text) {
            Ok((tok.text.to_string(), tok.pos))
        } else {
            Err(ParseError::syntax(
                tok.pos,
                format!("expected {what}, found `{}`", tok.text),
            ))
        }
    }

    fn number(&mut self, what: &str) -> Result<f64, ParseError> {
        let tok = self.take(what)?;
        match tok.text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(ParseError::syntax(
                tok.pos,
                format!("expected {what} (a finite number), found `{}`", tok.text),
            )),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(tok) => Err(ParseError::syntax(
                tok.pos,
                format!("unexpected `{}` at end of line", tok.text),
            )),
        }
    }
}

fn parse_clause(line: &mut Line<'_>) -> Result<Clause, ParseError> {
    let (variable, _) = line.ident("a variable name")?;
    line.keyword("is")?;
    let (label, _) = line.ident("a label name")?;
    Ok(Clause { variable, label })
}

fn parse_rule(line: &mut Line<'_>) -> Result<FuzzyRule, ParseError> {
    line.keyword("if")?;
    let mut antecedent = vec![parse_clause(line)?];
    let mut connective: Option<Connective> = None;
    loop {
        let tok = line.take("`and`, `or` or `then`")?;
        let this = match tok.text {
            "then" => break,
            "and" => Connective::And,
            "or" => Connective::Or,
            other => {
                return Err(ParseError::syntax(
                    tok.pos,
                    format!("expected `and`, `or` or `then`, found `{other}`"),
                ))
            }
        };
        if connective.is_some_and(|c| c != this) {
            return Err(ParseError::syntax(
                tok.pos,
                "mixing `and` and `or` in one rule is not supported",
            ));
        }
        connective = Some(this);
        antecedent.push(parse_clause(line)?);
    }
    let consequent = parse_clause(line)?;
    let mut rule = FuzzyRule::new(
        antecedent,
        connective.unwrap_or(Connective::And),
        consequent,
    );
    if line.peek().is_some() {
        line.keyword("weight")?;
        rule.weight = line.number("a rule weight")?;
    }
    line.finish()?;
    Ok(rule)
}

/// Parses the syntax of a FIS text without semantic validation.
pub fn parse_document(text: &str) -> Result<FisDocument, ParseError> {
    let mut doc = FisDocument {
        system: None,
        options: Vec::new(),
        variables: Vec::new(),
        rules: Vec::new(),
        end: Pos::new(1, 1),
    };
    let mut line_count = 0;
    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        line_count = line_no;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let mut line = tokenize(line_no, raw);
        let Some(head) = line.peek() else { continue };
        let head_pos = head.pos;
        match head.text {
            "system" => {
                line.next += 1;
                let (name, _) = line.ident("a system name")?;
                line.finish()?;
                if doc.system.is_some() {
                    return Err(ParseError::new(head_pos, ParseErrorKind::DuplicateSystem));
                }
                doc.system = Some((name, head_pos));
            }
            "option" => {
                line.next += 1;
                let (key, _) = line.ident("an option name")?;
                let value_tok = line.take("an option value")?;
                let (value, value_pos) = (value_tok.text.to_string(), value_tok.pos);
                line.finish()?;
                doc.options.push(OptionLine {
                    key,
                    value,
                    pos: head_pos,
                    value_pos,
                });
            }
            "input" | "output" => {
                let role = if head.text == "input" {
                    Role::Input
                } else {
                    Role::Output
                };
                line.next += 1;
                let (name, _) = line.ident("a variable name")?;
                line.keyword("range")?;
                let lo = line.number("the range lower bound")?;
                let hi = line.number("the range upper bound")?;
                line.finish()?;
                doc.variables.push(VariableBlock {
                    role,
                    name,
                    lo,
                    hi,
                    pos: head_pos,
                    labels: Vec::new(),
                });
            }
            "label" => {
                line.next += 1;
                let (name, _) = line.ident("a label name")?;
                let shape = line.take("`tri` or `trap`")?;
                let shape_pos = shape.pos;
                let mf = match shape.text {
                    "tri" => {
                        let a = line.number("breakpoint a")?;
                        let b = line.number("breakpoint b")?;
                        let c = line.number("breakpoint c")?;
                        MembershipFunction::triangular(a, b, c)
                    }
                    "trap" => {
                        let a = line.number("breakpoint a")?;
                        let b = line.number("breakpoint b")?;
                        let c = line.number("breakpoint c")?;
                        let d = line.number("breakpoint d")?;
                        MembershipFunction::trapezoidal(a, b, c, d)
                    }
                    other => {
                        return Err(ParseError::syntax(
                            shape_pos,
                            format!("expected `tri` or `trap`, found `{other}`"),
                        ))
                    }
                }
                .map_err(|e| ParseError::new(shape_pos, ParseErrorKind::Variable(e)))?;
                line.finish()?;
                let block = doc.variables.last_mut().ok_or_else(|| {
                    ParseError::new(head_pos, ParseErrorKind::LabelOutsideVariable)
                })?;
                block.labels.push(LabelLine {
                    name,
                    mf,
                    pos: head_pos,
                });
            }
            "rule" => {
                line.next += 1;
                let rule = parse_rule(&mut line)?;
                doc.rules.push(RuleLine {
                    rule,
                    pos: head_pos,
                });
            }
            other => {
                return Err(ParseError::syntax(
                    head_pos,
                    format!(
                        "expected `system`, `option`, `input`, `output`, `label` or `rule`, found `{other}`"
                    ),
                ))
            }
        }
    }
    doc.end = Pos::new(line_count.max(1) + 1, 1);
    Ok(doc)
}

fn apply_option(ops: &mut Operators, resolution: &mut Option<usize>, opt: &OptionLine) -> Result<(), ParseError> {
    let invalid = |message: String| {
        ParseError::new(
            opt.value_pos,
            ParseErrorKind::InvalidOptionValue {
                key: opt.key.clone(),
                message,
            },
        )
    };
    let v = opt.value.as_str();
    match opt.key.as_str() {
        "and_op" => ops.and_op = v.parse().map_err(invalid)?,
        "or_op" => ops.or_op = v.parse().map_err(invalid)?,
        "implication" => ops.implication = v.parse().map_err(invalid)?,
        "aggregation" => ops.aggregation = v.parse().map_err(invalid)?,
        "defuzz" => ops.defuzz = v.parse().map_err(invalid)?,
        "resolution" => {
            let n = v
                .parse::<usize>()
                .map_err(|_| invalid(format!("`{v}` is not a sample count")))?;
            *resolution = Some(n);
        }
        other => {
            return Err(ParseError::new(
                opt.pos,
                ParseErrorKind::UnknownOption(other.to_string()),
            ))
        }
    }
    Ok(())
}

fn label_error_pos(block: &VariableBlock, label: &str, last: bool) -> Pos {
    let mut matches = block.labels.iter().filter(|l| l.name == label);
    let found = if last { matches.next_back() } else { matches.next() };
    found.map_or(block.pos, |l| l.pos)
}

fn variable_error_pos(block: &VariableBlock, err: &FuzzyError) -> Pos {
    match err {
        FuzzyError::DuplicateLabel { label, .. } => label_error_pos(block, label, true),
        FuzzyError::SupportOutsideUniverse { label, .. } | FuzzyError::LabelOrder { label, .. } => {
            label_error_pos(block, label, false)
        }
        FuzzyError::InvalidName(name) => label_error_pos(block, name, false),
        _ => block.pos,
    }
}

impl FisDocument {
    /// Validates the document and builds the system it describes.
    pub fn to_definition(&self) -> Result<FisDefinition, ParseError> {
        let (name, system_pos) = self
            .system
            .clone()
            .ok_or_else(|| ParseError::new(Pos::new(1, 1), ParseErrorKind::MissingSystem))?;

        let mut operators = Operators::default();
        let mut resolution = None;
        for (i, opt) in self.options.iter().enumerate() {
            if self.options[..i].iter().any(|o| o.key == opt.key) {
                return Err(ParseError::new(
                    opt.pos,
                    ParseErrorKind::DuplicateOption(opt.key.clone()),
                ));
            }
            apply_option(&mut operators, &mut resolution, opt)?;
        }

        let mut builder: FisBuilder = FisDefinition::builder(name.clone()).operators(operators);
        if let Some(n) = resolution {
            builder = builder.resolution(n);
        }
        let mut seen_output: Option<&VariableBlock> = None;
        for (i, block) in self.variables.iter().enumerate() {
            if self.variables[..i].iter().any(|b| b.name == block.name) {
                return Err(ParseError::new(
                    block.pos,
                    ParseErrorKind::Definition(DefinitionError::DuplicateVariable(block.name.clone())),
                ));
            }
            let labels = block
                .labels
                .iter()
                .map(|l| Label::new(l.name.clone(), l.mf))
                .collect();
            let var = LinguisticVariable::new(block.name.clone(), block.lo, block.hi, labels).map_err(
                |e| ParseError::new(variable_error_pos(block, &e), ParseErrorKind::Variable(e)),
            )?;
            match block.role {
                Role::Input => builder = builder.input(var),
                Role::Output => {
                    if seen_output.is_some() {
                        return Err(ParseError::new(block.pos, ParseErrorKind::MultipleOutputs));
                    }
                    seen_output = Some(block);
                    builder = builder.output(var);
                }
            }
        }
        builder = builder.rules(self.rules.iter().map(|r| r.rule.clone()));

        builder.build().map_err(|e| {
            let pos = match &e {
                DefinitionError::EmptyAntecedent { rule }
                | DefinitionError::InvalidWeight { rule, .. }
                | DefinitionError::UnknownVariable { rule, .. }
                | DefinitionError::UnknownLabel { rule, .. }
                | DefinitionError::DuplicateClause { rule, .. }
                | DefinitionError::ConsequentNotOutput { rule, .. } => self.rules[*rule].pos,
                DefinitionError::NoRules | DefinitionError::NoOutput | DefinitionError::NoInputs => {
                    self.end
                }
                DefinitionError::ResolutionTooSmall(_) => self
                    .options
                    .iter()
                    .find(|o| o.key == "resolution")
                    .map_or(system_pos, |o| o.value_pos),
                _ => system_pos,
            };
            ParseError::new(pos, ParseErrorKind::Definition(e))
        })
    }
}

/// Parses and validates a FIS text.
pub fn parse_fis(text: &str) -> Result<FisDefinition, ParseError> {
    parse_document(text)?.to_definition()
}

/// Like [`parse_fis`] for raw bytes; invalid UTF-8 is reported with the
/// position of the first bad byte.
pub fn parse_fis_bytes(bytes: &[u8]) -> Result<FisDefinition, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_fis(text),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            // The valid prefix is UTF-8, so counting chars is safe.
            let prefix = std::str::from_utf8(valid).unwrap_or_default();
            let line = prefix.matches('\n').count() + 1;
            let column = prefix.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(ParseError::new(Pos::new(line, column), ParseErrorKind::InvalidUtf8))
        }
    }
}

fn write_variable(out: &mut String, role: &str, var: &LinguisticVariable) {
    out.push_str(&format!(
        "{role} {} range {} {}\n",
        var.name(),
        format_exact(var.lo()),
        format_exact(var.hi())
    ));
    for label in var.labels() {
        let params: Vec<String> = label.mf.params().iter().map(|&p| format_exact(p)).collect();
        out.push_str(&format!(
            "  label {} {} {}\n",
            label.name,
            label.mf.keyword(),
            params.join(" ")
        ));
    }
}

/// Canonical text of `fis`: header, every option in a fixed order, input
/// blocks in declaration order, the output block, then one rule per line.
pub fn serialize_fis(fis: &FisDefinition) -> String {
    let ops = fis.operators();
    let mut out = String::new();
    out.push_str(&format!("system {}\n", fis.name()));
    out.push_str(&format!("option and_op {}\n", ops.and_op));
    out.push_str(&format!("option or_op {}\n", ops.or_op));
    out.push_str(&format!("option implication {}\n", ops.implication));
    out.push_str(&format!("option aggregation {}\n", ops.aggregation));
    out.push_str(&format!("option defuzz {}\n", ops.defuzz));
    out.push_str(&format!("option resolution {}\n", fis.resolution()));
    for var in fis.inputs() {
        out.push('\n');
        write_variable(&mut out, "input", var);
    }
    out.push('\n');
    write_variable(&mut out, "output", fis.output());
    out.push('\n');
    for rule in fis.rules() {
        out.push_str(&format!("rule {rule}"));
        if rule.weight != 1.0 {
            out.push_str(&format!(" weight {}", format_exact(rule.weight)));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
system tiny
input A range 0 1
  label low tri 0 0 1
  label high tri 0 1 1
output OUT range 0 10
  label small tri 0 0 10
  label big tri 0 10 10
rule if A is low then OUT is small
";

    fn kind(text: &str) -> ParseErrorKind {
        parse_fis(text).unwrap_err().kind
    }

    #[test]
    fn parses_three_clause_rule() {
        let text = "\
system s
input NPV range 0 1
  label low tri 0 0 1
  label high tri 0 1 1
input GEN range 0 1
  label low tri 0 0 0.5
  label med tri 0 0.5 1
  label high tri 0.5 1 1
input DIVERS range 0 5
  label low tri 0 0 5
  label high tri 0 5 5
output PERM-INCENT range 0 100
  label mf1 tri 0 0 100
  label mf5 tri 0 100 100
rule if NPV is low and GEN is med and DIVERS is high then PERM-INCENT is mf5
";
        let fis = parse_fis(text).unwrap();
        assert_eq!(fis.rules().len(), 1);
        let rule = &fis.rules()[0];
        assert_eq!(rule.connective, Connective::And);
        assert_eq!(
            rule.antecedent,
            vec![Clause::new("NPV", "low"), Clause::new("GEN", "med"), Clause::new("DIVERS", "high")]
        );
        assert_eq!(rule.consequent, Clause::new("PERM-INCENT", "mf5"));
        assert_eq!(rule.weight, 1.0);
    }

    #[test]
    fn empty_rules_section() {
        let text = MINIMAL.replace("rule if A is low then OUT is small\n", "");
        let err = parse_fis(&text).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Definition(DefinitionError::NoRules));
        assert!(err.pos.line >= 7);
    }

    #[test]
    fn support_outside_universe() {
        let text = "\
system s
input GEN range 0 20
  label med tri 0 15 30
output O range 0 1
  label a trap 0 0 1 1
rule if GEN is med then O is a
";
        let err = parse_fis(text).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Variable(FuzzyError::SupportOutsideUniverse { .. })));
        assert_eq!(err.pos, Pos::new(3, 3));
    }

    #[test]
    fn semantic_errors_are_distinct() {
        assert!(matches!(
            kind(&MINIMAL.replace("then OUT is small", "then OUT is huge")),
            ParseErrorKind::Definition(DefinitionError::UnknownLabel { .. })
        ));
        let dup = MINIMAL.replace("output OUT", "input A range 0 1\n  label x trap 0 0 1 1\noutput OUT");
        let err = parse_fis(&dup).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Definition(DefinitionError::DuplicateVariable(_))));
        assert_eq!(err.pos.line, 5);
        assert_eq!(kind(&MINIMAL.replace("system tiny\n", "")), ParseErrorKind::MissingSystem);
        assert!(matches!(kind(&format!("{MINIMAL}option resolution 5\n")), ParseErrorKind::Definition(DefinitionError::ResolutionTooSmall(5))));
        assert!(matches!(kind(&format!("{MINIMAL}option defuzz bisector\n")), ParseErrorKind::InvalidOptionValue { .. }));
        assert!(matches!(kind(&format!("{MINIMAL}option color red\n")), ParseErrorKind::UnknownOption(_)));
        assert!(matches!(
            kind(&format!("{MINIMAL}option resolution 101\noption resolution 201\n")),
            ParseErrorKind::DuplicateOption(_)
        ));
        assert_eq!(kind(&format!("label x tri 0 0 1\n{MINIMAL}")), ParseErrorKind::LabelOutsideVariable);
        assert_eq!(
            kind(&format!("{MINIMAL}output O2 range 0 1\n  label a trap 0 0 1 1\n")),
            ParseErrorKind::MultipleOutputs
        );
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_fis("system s\ninput A rnge 0 1\n").unwrap_err();
        assert_eq!(err.pos, Pos::new(2, 9));
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));

        let err = parse_fis("system s\ninput A range 0 inf\n").unwrap_err();
        assert_eq!(err.pos, Pos::new(2, 17));

        let err = parse_fis("system s\nrule if A is low and B is x or C is y then O is z\n").unwrap_err();
        assert_eq!(err.pos.line, 2);
        assert!(err.to_string().contains("mixing"));

        let err = parse_fis("system s\nrule if A is low\n").unwrap_err();
        assert_eq!(err.pos, Pos::new(2, 17));

        let err = parse_fis_bytes(b"system s\ninput \xff").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::InvalidUtf8);
        assert_eq!(err.pos, Pos::new(2, 7));
    }

    #[test]
    fn comments_and_scientific_notation() {
        let text = "\
# header comment
system s   # trailing
input NPV range -5e5 1.85E8
  label all trap -5e5 -5e5 1.85e8 1.85e8
output O range 0 1
  label a trap 0 0 1 1
rule if NPV is all then O is a weight 0.25
";
        let fis = parse_fis(text).unwrap();
        assert_eq!(fis.inputs()[0].lo(), -500000.0);
        assert_eq!(fis.inputs()[0].hi(), 185e6);
        assert_eq!(fis.rules()[0].weight, 0.25);
    }

    #[test]
    fn minimal_serialization() {
        let fis = parse_fis(MINIMAL).unwrap();
        let text = serialize_fis(&fis);
        assert_eq!(text.lines().filter(|l| l.starts_with("input ")).count(), 1);
        assert_eq!(text.lines().filter(|l| l.starts_with("output ")).count(), 1);
        assert_eq!(text.lines().filter(|l| l.starts_with("rule ")).count(), 1);
        assert_eq!(parse_fis(&text).unwrap(), fis);
        assert_eq!(serialize_fis(&parse_fis(&text).unwrap()), text);
        assert!(text.contains("rule if A is low then OUT is small\n"));
    }

    #[test]
    fn or_rules_and_weights_round_trip() {
        let text = MINIMAL.replace(
            "rule if A is low then OUT is small\n",
            "rule if A is low or A2 is b then OUT is big weight 0.3333333333333333\n",
        );
        let text = text.replace("output OUT", "input A2 range 0 1\n  label b trap 0 0 1 1\noutput OUT");
        let fis = parse_fis(&text).unwrap();
        assert_eq!(fis.rules()[0].connective, Connective::Or);
        assert_eq!(fis.rules()[0].weight, 1.0 / 3.0);
        assert_eq!(parse_fis(&serialize_fis(&fis)).unwrap(), fis);
    }
}
