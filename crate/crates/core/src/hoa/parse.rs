use std::collections::HashMap;

use super::lexer::{tokenize, Spanned, Tok};
use super::{HoaError, LabelFormula, RawAutomaton, RawEdge, StateBlock};

/// Parses a single HOA v1 document.
pub fn parse_hoa(text: &str) -> Result<RawAutomaton, HoaError> {
    let toks = tokenize(text)?;
    Parser {
        toks,
        pos: 0,
        aliases: HashMap::new(),
        eof: end_position(text),
    }
    .document()
}

fn end_position(text: &str) -> (usize, usize) {
    let line = text.matches('\n').count() + 1;
    let col = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    aliases: HashMap<String, LabelFormula>,
    eof: (usize, usize),
}

/// A label before AP-range checking, with the position of each AP reference.
type Positioned = (LabelFormula, Vec<(u32, usize, usize)>);

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map_or(self.eof, |s| (s.line, s.col))
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn err(&self, msg: impl Into<String>) -> HoaError {
        let (l, c) = self.here();
        HoaError::syntax(l, c, msg)
    }

    fn unsupported(&self, feature: &str) -> HoaError {
        let (l, c) = self.here();
        HoaError::unsupported(l, c, feature)
    }

    fn expect_int(&mut self, what: &str) -> Result<u32, HoaError> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), HoaError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn at_header_end(&self) -> bool {
        matches!(self.peek(), None | Some(Tok::Header(_)) | Some(Tok::Body))
    }

    fn document(mut self) -> Result<RawAutomaton, HoaError> {
        match self.peek() {
            Some(Tok::Header(h)) if h == "HOA" => {
                self.pos += 1;
            }
            _ => return Err(self.err("document must start with 'HOA:'")),
        }
        match self.next().map(|s| s.tok) {
            Some(Tok::Ident(v)) if v == "v1" => {}
            _ => {
                self.pos -= 1;
                return Err(self.err("only HOA version v1 is supported"));
            }
        }

        let mut header_fields = vec![("HOA".to_string(), "v1".to_string())];
        let mut ap_names: Option<Vec<String>> = None;
        let mut declared_states: Option<u32> = None;
        let mut start: Option<u32> = None;
        let mut acceptance: Option<String> = None;

        loop {
            let (key, line, col) = match self.next() {
                Some(Spanned {
                    tok: Tok::Header(k),
                    line,
                    col,
                }) => (k, line, col),
                Some(Spanned { tok: Tok::Body, .. }) => break,
                Some(_) => {
                    self.pos -= 1;
                    return Err(self.err("expected header item or --BODY--"));
                }
                None => return Err(self.err("missing --BODY--")),
            };
            let value_start = self.pos;
            match key.as_str() {
                "States" => {
                    if declared_states.is_some() {
                        return Err(HoaError::syntax(line, col, "duplicate States header"));
                    }
                    declared_states = Some(self.expect_int("state count")?);
                }
                "Start" => {
                    if start.is_some() {
                        return Err(HoaError::unsupported(line, col, "multiple initial states"));
                    }
                    start = Some(self.expect_int("initial state")?);
                    if self.peek() == Some(&Tok::And) {
                        return Err(self.unsupported("alternating initial states (Start conjunction)"));
                    }
                }
                "AP" => {
                    if ap_names.is_some() {
                        return Err(HoaError::syntax(line, col, "duplicate AP header"));
                    }
                    let n = self.expect_int("AP count")?;
                    let mut names = Vec::with_capacity(n as usize);
                    for _ in 0..n {
                        match self.next().map(|s| s.tok) {
                            Some(Tok::Str(s)) => names.push(s),
                            _ => {
                                self.pos -= 1;
                                return Err(self.err(format!("AP header declares {n} names")));
                            }
                        }
                    }
                    ap_names = Some(names);
                }
                "Alias" => {
                    let name = match self.next().map(|s| s.tok) {
                        Some(Tok::Alias(a)) => a,
                        _ => {
                            self.pos -= 1;
                            return Err(self.err("expected @alias name"));
                        }
                    };
                    let (formula, refs) = self.label_expr(true)?;
                    if let Some(n) = ap_names.as_ref().map(Vec::len) {
                        check_aps(&refs, n)?;
                    }
                    self.aliases.insert(name, formula);
                }
                "Acceptance" => {
                    if acceptance.is_some() {
                        return Err(HoaError::syntax(line, col, "duplicate Acceptance header"));
                    }
                    acceptance = Some(String::new());
                }
                "State" => return Err(HoaError::syntax(line, col, "State: before --BODY--")),
                _ => {}
            }
            // skip any remaining value tokens of this item
            while !self.at_header_end() {
                self.pos += 1;
            }
            let text = render(&self.toks[value_start..self.pos]);
            if key == "Acceptance" {
                acceptance = Some(text.clone());
            }
            header_fields.push((key, text));
        }

        let ap_names = ap_names.unwrap_or_default();
        let acceptance_spec =
            acceptance.ok_or_else(|| HoaError::syntax(1, 1, "missing Acceptance header"))?;

        // body
        let mut blocks: Vec<Option<StateBlock>> = Vec::new();
        let mut dest_refs: Vec<(u32, usize, usize)> = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::End) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Header(h)) if h == "State" => {
                    let (line, col) = self.here();
                    self.pos += 1;
                    if self.peek() == Some(&Tok::LBracket) {
                        return Err(self.unsupported("state labels"));
                    }
                    let id = self.expect_int("state id")?;
                    let name = match self.peek() {
                        Some(Tok::Str(s)) => {
                            let s = s.clone();
                            self.pos += 1;
                            Some(s)
                        }
                        _ => None,
                    };
                    let marks = self.marks()?;
                    let mut edges = Vec::new();
                    loop {
                        match self.peek() {
                            Some(Tok::LBracket) => {
                                self.pos += 1;
                                let (label, refs) = self.label_expr(false)?;
                                check_aps(&refs, ap_names.len())?;
                                self.expect(Tok::RBracket, "']'")?;
                                let (dl, dc) = self.here();
                                let dest = self.expect_int("destination state")?;
                                if self.peek() == Some(&Tok::And) {
                                    return Err(self.unsupported("universal branching (destination conjunction)"));
                                }
                                dest_refs.push((dest, dl, dc));
                                let marks = self.marks()?;
                                edges.push(RawEdge { label, dest, marks });
                            }
                            Some(Tok::Int(_)) => return Err(self.unsupported("implicit labels")),
                            _ => break,
                        }
                    }
                    let idx = id as usize;
                    if idx >= blocks.len() {
                        if let Some(n) = declared_states {
                            if id >= n {
                                return Err(HoaError::MissingDestination {
                                    line,
                                    col,
                                    dest: id,
                                    n_states: n as usize,
                                });
                            }
                        }
                        blocks.resize(idx + 1, None);
                    }
                    if blocks[idx].is_some() {
                        return Err(HoaError::syntax(line, col, format!("duplicate State {id}")));
                    }
                    blocks[idx] = Some(StateBlock {
                        id,
                        name,
                        marks,
                        edges,
                    });
                }
                Some(_) => return Err(self.err("expected State: or --END--")),
                None => return Err(self.err("missing --END--")),
            }
        }
        if self.peek().is_some() {
            return Err(self.unsupported("multiple documents in one input"));
        }

        let n_states = match declared_states {
            Some(n) => n as usize,
            None => blocks
                .len()
                .max(dest_refs.iter().map(|d| d.0 as usize + 1).max().unwrap_or(0))
                .max(start.map_or(0, |s| s as usize + 1)),
        };
        for &(dest, line, col) in &dest_refs {
            if dest as usize >= n_states {
                return Err(HoaError::MissingDestination {
                    line,
                    col,
                    dest,
                    n_states,
                });
            }
        }
        if let Some(s) = start {
            if s as usize >= n_states {
                return Err(HoaError::MissingDestination {
                    line: 1,
                    col: 1,
                    dest: s,
                    n_states,
                });
            }
        }
        blocks.resize(n_states, None);
        let state_blocks = blocks
            .into_iter()
            .enumerate()
            .map(|(i, b)| {
                b.unwrap_or(StateBlock {
                    id: i as u32,
                    name: None,
                    marks: Vec::new(),
                    edges: Vec::new(),
                })
            })
            .collect();

        Ok(RawAutomaton {
            header_fields,
            ap_names,
            start,
            state_blocks,
            acceptance_spec,
        })
    }

    fn marks(&mut self) -> Result<Vec<u32>, HoaError> {
        let mut marks = Vec::new();
        if self.peek() == Some(&Tok::LBrace) {
            self.pos += 1;
            while let Some(Tok::Int(m)) = self.peek() {
                marks.push(*m);
                self.pos += 1;
            }
            self.expect(Tok::RBrace, "'}'")?;
        }
        Ok(marks)
    }

    fn label_expr(&mut self, in_alias: bool) -> Result<Positioned, HoaError> {
        let mut refs = Vec::new();
        let f = self.or_expr(in_alias, &mut refs)?;
        Ok((f, refs))
    }

    fn or_expr(&mut self, in_alias: bool, refs: &mut Vec<(u32, usize, usize)>) -> Result<LabelFormula, HoaError> {
        let mut parts = vec![self.and_expr(in_alias, refs)?];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            parts.push(self.and_expr(in_alias, refs)?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            LabelFormula::Or(parts)
        })
    }

    fn and_expr(&mut self, in_alias: bool, refs: &mut Vec<(u32, usize, usize)>) -> Result<LabelFormula, HoaError> {
        let mut parts = vec![self.unary(in_alias, refs)?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            parts.push(self.unary(in_alias, refs)?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            LabelFormula::And(parts)
        })
    }

    fn unary(&mut self, in_alias: bool, refs: &mut Vec<(u32, usize, usize)>) -> Result<LabelFormula, HoaError> {
        let (line, col) = self.here();
        match self.next().map(|s| s.tok) {
            Some(Tok::Not) => Ok(LabelFormula::Not(Box::new(self.unary(in_alias, refs)?))),
            Some(Tok::True) => Ok(LabelFormula::True),
            Some(Tok::False) => Ok(LabelFormula::False),
            Some(Tok::Int(i)) => {
                refs.push((i, line, col));
                Ok(LabelFormula::Ap(i))
            }
            Some(Tok::Alias(name)) => {
                if in_alias {
                    return Err(HoaError::unsupported(line, col, "aliases referring to other aliases"));
                }
                let f = self
                    .aliases
                    .get(&name)
                    .cloned()
                    .ok_or_else(|| HoaError::syntax(line, col, format!("undefined alias @{name}")))?;
                if let Some(m) = f.max_ap() {
                    refs.push((m, line, col));
                }
                Ok(f)
            }
            Some(Tok::LParen) => {
                let f = self.or_expr(in_alias, refs)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            _ => {
                self.pos -= 1;
                Err(self.err("expected label expression"))
            }
        }
    }
}

fn check_aps(refs: &[(u32, usize, usize)], n_aps: usize) -> Result<(), HoaError> {
    for &(index, line, col) in refs {
        if index as usize >= n_aps {
            return Err(HoaError::ApOutOfRange {
                line,
                col,
                index,
                n_aps,
            });
        }
    }
    Ok(())
}

fn render(toks: &[Spanned]) -> String {
    let mut out = String::new();
    for (i, t) in toks.iter().enumerate() {
        let piece = match &t.tok {
            Tok::Header(h) => format!("{h}:"),
            Tok::Ident(s) => s.clone(),
            Tok::Alias(a) => format!("@{a}"),
            Tok::Str(s) => format!("{s:?}"),
            Tok::Int(v) => v.to_string(),
            Tok::True => "t".into(),
            Tok::False => "f".into(),
            Tok::Not => "!".into(),
            Tok::And => "&".into(),
            Tok::Or => "|".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::LBracket => "[".into(),
            Tok::RBracket => "]".into(),
            Tok::LBrace => "{".into(),
            Tok::RBrace => "}".into(),
            Tok::Body => "--BODY--".into(),
            Tok::End => "--END--".into(),
        };
        let glue = i > 0
            && !matches!(t.tok, Tok::LParen | Tok::RParen)
            && !matches!(toks[i - 1].tok, Tok::LParen | Tok::Not);
        if glue {
            out.push(' ');
        }
        out.push_str(&piece);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "HOA: v1\nStates: 1\nStart: 0\nAP: 1 \"p\"\nAcceptance: 1 Inf(0)\n--BODY--\nState: 0 {0}\n[t] 0\n--END--\n";

    #[test]
    fn minimal_document() {
        let raw = parse_hoa(MINIMAL).unwrap();
        assert_eq!(raw.n_states(), 1);
        assert_eq!(raw.ap_names, vec!["p"]);
        assert_eq!(raw.state_blocks[0].edges.len(), 1);
        assert_eq!(raw.state_blocks[0].marks, vec![0]);
        assert_eq!(raw.acceptance_spec, "1 Inf(0)");
        assert_eq!(raw.start, Some(0));
    }

    #[test]
    fn crlf_is_accepted() {
        let raw = parse_hoa(&MINIMAL.replace('\n', "\r\n")).unwrap();
        assert_eq!(raw.n_states(), 1);
    }

    #[test]
    fn missing_destination() {
        let text = "HOA: v1\nStates: 2\nStart: 0\nAP: 1 \"p\"\nAcceptance: 1 Inf(0)\n--BODY--\nState: 0\n[0] 5\nState: 1\n[t] 1\n--END--\n";
        match parse_hoa(text).unwrap_err() {
            HoaError::MissingDestination { dest, line, col, .. } => {
                assert_eq!(dest, 5);
                assert_eq!((line, col), (8, 5));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn ap_index_out_of_range() {
        let text = MINIMAL.replace("[t] 0", "[1] 0");
        assert!(matches!(
            parse_hoa(&text).unwrap_err(),
            HoaError::ApOutOfRange { index: 1, .. }
        ));
    }

    #[test]
    fn unsupported_features_are_named() {
        let cases = [
            (MINIMAL.replace("Start: 0", "Start: 0\nStart: 0"), "multiple initial states"),
            (MINIMAL.replace("[t] 0", "0"), "implicit labels"),
            (MINIMAL.replace("Start: 0", "Start: 0 & 0"), "alternating"),
            (MINIMAL.replace("[t] 0", "[t] 0&0"), "universal branching"),
            (MINIMAL.replace("State: 0 {0}", "State: [t] 0 {0}"), "state labels"),
            (
                MINIMAL.replace("Acceptance:", "Alias: @x 0\nAlias: @y @x\nAcceptance:"),
                "aliases referring",
            ),
        ];
        for (text, feature) in cases {
            match parse_hoa(&text) {
                Err(HoaError::Unsupported { feature: f, .. }) => assert!(f.contains(feature), "{f}"),
                other => panic!("{feature}: {other:?}"),
            }
        }
    }

    #[test]
    fn simple_alias_expands() {
        let text = MINIMAL.replace("Acceptance:", "Alias: @p 0\nAcceptance:").replace("[t] 0", "[@p | !@p] 0");
        let raw = parse_hoa(&text).unwrap();
        let label = &raw.state_blocks[0].edges[0].label;
        assert!(label.eval(0) && label.eval(1));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_hoa("HOA: v1\nStates: x\n").unwrap_err();
        assert_eq!(err.position(), Some((2, 9)));
        assert!(err.to_string().contains("syntax error"));
    }

    #[test]
    fn unknown_headers_are_kept() {
        let text = MINIMAL.replace("Acceptance:", "tool: \"spot\" \"2.11\"\nproperties: deterministic state-acc\nAcceptance:");
        let raw = parse_hoa(&text).unwrap();
        assert_eq!(raw.header("tool"), Some("\"spot\" \"2.11\""));
        assert_eq!(raw.header("properties"), Some("deterministic state-acc"));
    }

    #[test]
    fn gaps_become_empty_blocks() {
        let text = "HOA: v1\nStates: 3\nStart: 0\nAP: 1 \"p\"\nAcceptance: 1 Inf(0)\n--BODY--\nState: 0\n[0] 2\nState: 2 {0}\n[t] 2\n--END--\n";
        let raw = parse_hoa(text).unwrap();
        assert_eq!(raw.n_states(), 3);
        assert!(raw.state_blocks[1].edges.is_empty());
        assert_eq!(raw.state_blocks[1].id, 1);
    }
}
