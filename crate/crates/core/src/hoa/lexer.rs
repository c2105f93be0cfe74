use super::HoaError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    /// `Name:` header or body keyword.
    Header(String),
    Ident(String),
    Alias(String),
    Str(String),
    Int(u32),
    True,
    False,
    Not,
    And,
    Or,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Body,
    End,
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Spanned>, HoaError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line: tl, col: tc });
        match c {
            c if c.is_whitespace() => bump!(),
            '/' if chars.get(i + 1) == Some(&'*') => {
                bump!();
                bump!();
                let mut depth = 1;
                while depth > 0 {
                    if i >= chars.len() {
                        return Err(HoaError::syntax(tl, tc, "unterminated comment"));
                    }
                    if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                        depth -= 1;
                        bump!();
                        bump!();
                    } else if chars[i] == '/' && chars.get(i + 1) == Some(&'*') {
                        depth += 1;
                        bump!();
                        bump!();
                    } else {
                        bump!();
                    }
                }
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None => return Err(HoaError::syntax(tl, tc, "unterminated string")),
                        Some('"') => {
                            bump!();
                            break;
                        }
                        Some('\\') => {
                            bump!();
                            match chars.get(i) {
                                Some(&e) => {
                                    s.push(e);
                                    bump!();
                                }
                                None => {
                                    return Err(HoaError::syntax(tl, tc, "unterminated string"))
                                }
                            }
                        }
                        Some(&ch) => {
                            s.push(ch);
                            bump!();
                        }
                    }
                }
                push(&mut out, Tok::Str(s));
            }
            '!' => {
                bump!();
                push(&mut out, Tok::Not);
            }
            '&' => {
                bump!();
                push(&mut out, Tok::And);
            }
            '|' => {
                bump!();
                push(&mut out, Tok::Or);
            }
            '(' => {
                bump!();
                push(&mut out, Tok::LParen);
            }
            ')' => {
                bump!();
                push(&mut out, Tok::RParen);
            }
            '[' => {
                bump!();
                push(&mut out, Tok::LBracket);
            }
            ']' => {
                bump!();
                push(&mut out, Tok::RBracket);
            }
            '{' => {
                bump!();
                push(&mut out, Tok::LBrace);
            }
            '}' => {
                bump!();
                push(&mut out, Tok::RBrace);
            }
            '-' if chars[i..].starts_with(&['-', '-']) => {
                let rest: String = chars[i..].iter().take(8).collect();
                if rest.starts_with("--BODY--") {
                    for _ in 0..8 {
                        bump!();
                    }
                    push(&mut out, Tok::Body);
                } else if rest.starts_with("--END--") {
                    for _ in 0..7 {
                        bump!();
                    }
                    push(&mut out, Tok::End);
                } else if rest.starts_with("--ABORT--") {
                    return Err(HoaError::unsupported(tl, tc, "--ABORT--"));
                } else {
                    return Err(HoaError::syntax(tl, tc, "unexpected '-'"));
                }
            }
            c if c.is_ascii_digit() => {
                let mut v: u64 = 0;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    v = v * 10 + chars[i].to_digit(10).unwrap() as u64;
                    if v > u32::MAX as u64 {
                        return Err(HoaError::syntax(tl, tc, "integer too large"));
                    }
                    bump!();
                }
                push(&mut out, Tok::Int(v as u32));
            }
            '@' => {
                bump!();
                let name = ident(&chars, &mut i);
                col += name.chars().count();
                if name.is_empty() {
                    return Err(HoaError::syntax(tl, tc, "empty alias name"));
                }
                push(&mut out, Tok::Alias(name));
            }
            c if c.is_alphabetic() || c == '_' => {
                let name = ident(&chars, &mut i);
                col += name.chars().count();
                if chars.get(i) == Some(&':') {
                    bump!();
                    push(&mut out, Tok::Header(name));
                } else {
                    let tok = match name.as_str() {
                        "t" => Tok::True,
                        "f" => Tok::False,
                        _ => Tok::Ident(name),
                    };
                    push(&mut out, tok);
                }
            }
            other => {
                return Err(HoaError::syntax(tl, tc, format!("unexpected character {other:?}")))
            }
        }
    }
    Ok(out)
}

fn ident(chars: &[char], i: &mut usize) -> String {
    let mut s = String::new();
    while *i < chars.len() && (chars[*i].is_alphanumeric() || chars[*i] == '_' || chars[*i] == '-') {
        s.push(chars[*i]);
        *i += 1;
    }
    s
}
