//! Parser for the line-oriented space format.
//!
//! ```text
//! # comment
//! alpha {1.1,1.3,1.5}[1.3]          parameter with domain and default
//! rho | alpha in {1.3,1.5}          rho only active for these alpha values
//! {alpha=1.1, rho=0.5}              forbidden combination
//! ```

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::SpaceError;
use crate::space::{Condition, ConfigurationSpace, ForbiddenCombination, Parameter};

struct RawParam {
    line: usize,
    name: String,
    domain: Vec<String>,
    default: String,
}

struct RawCondition {
    line: usize,
    child: String,
    parent: String,
    values: Vec<String>,
}

struct RawForbidden {
    line: usize,
    pairs: Vec<(String, String)>,
}

struct Cursor<'a> {
    line: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: usize, text: &'a str) -> Self {
        Cursor { line, text, pos: 0 }
    }

    fn column(&self) -> usize {
        self.text[..self.pos].chars().count() + 1
    }

    fn err(&self, message: impl Into<String>) -> SpaceError {
        SpaceError::Syntax { line: self.line, column: self.column(), message: message.into() }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.text.len()
    }

    fn expect(&mut self, c: char) -> Result<(), SpaceError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    /// A name or value token: anything up to whitespace or a delimiter.
    fn token(&mut self, what: &str) -> Result<String, SpaceError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_whitespace() || "{}[]|,=".contains(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        if self.pos == start {
            return Err(self.err(format!("expected {what}")));
        }
        Ok(self.text[start..self.pos].to_string())
    }

    fn keyword(&mut self, kw: &str) -> Result<(), SpaceError> {
        self.skip_ws();
        let save = self.pos;
        let tok = self.token(kw)?;
        if tok != kw {
            self.pos = save;
            return Err(self.err(format!("expected `{kw}`")));
        }
        Ok(())
    }

    /// `{a,b,c}`
    fn value_list(&mut self) -> Result<Vec<String>, SpaceError> {
        self.expect('{')?;
        let mut values = Vec::new();
        loop {
            values.push(self.token("value")?);
            if self.eat(',') {
                continue;
            }
            self.expect('}')?;
            return Ok(values);
        }
    }

    fn finish(&mut self) -> Result<(), SpaceError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }
}

pub(crate) fn parse(text: &str) -> Result<ConfigurationSpace, SpaceError> {
    let mut params = Vec::new();
    let mut conditions = Vec::new();
    let mut forbidden = Vec::new();

    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = match raw_line.find('#') {
            Some(k) => &raw_line[..k],
            None => raw_line,
        };
        let mut cur = Cursor::new(line_no, content);
        if cur.at_end() {
            continue;
        }
        if cur.peek() == Some('{') {
            let mut pairs = Vec::new();
            cur.expect('{')?;
            loop {
                let name = cur.token("parameter name")?;
                cur.expect('=')?;
                let value = cur.token("value")?;
                pairs.push((name, value));
                if cur.eat(',') {
                    continue;
                }
                cur.expect('}')?;
                break;
            }
            cur.finish()?;
            if pairs.len() < 2 {
                return Err(SpaceError::Syntax {
                    line: line_no,
                    column: 1,
                    message: "forbidden combination needs at least two assignments".into(),
                });
            }
            forbidden.push(RawForbidden { line: line_no, pairs });
            continue;
        }
        let name = cur.token("parameter name")?;
        if cur.eat('|') {
            let parent = cur.token("parent parameter name")?;
            cur.keyword("in")?;
            let values = cur.value_list()?;
            cur.finish()?;
            conditions.push(RawCondition { line: line_no, child: name, parent, values });
        } else {
            let domain = cur.value_list()?;
            cur.expect('[')?;
            let default = cur.token("default value")?;
            cur.expect(']')?;
            cur.finish()?;
            params.push(RawParam { line: line_no, name, domain, default });
        }
    }

    resolve(params, conditions, forbidden)
}

fn resolve(
    raw_params: Vec<RawParam>,
    raw_conditions: Vec<RawCondition>,
    raw_forbidden: Vec<RawForbidden>,
) -> Result<ConfigurationSpace, SpaceError> {
    let mut params: Vec<Parameter> = Vec::with_capacity(raw_params.len());
    for rp in raw_params {
        if params.iter().any(|p| p.name() == rp.name) {
            return Err(SpaceError::DuplicateParameter { name: rp.name, line: Some(rp.line) });
        }
        let p = Parameter::new(rp.name, rp.domain, &rp.default).map_err(|e| e.at_line(rp.line))?;
        params.push(p);
    }
    let lookup = |name: &str, line: usize| -> Result<usize, SpaceError> {
        params
            .iter()
            .position(|p| p.name() == name)
            .ok_or_else(|| SpaceError::UnknownParameter { name: name.to_string(), line: Some(line) })
    };
    let value_of = |p: usize, value: &str, line: usize| -> Result<usize, SpaceError> {
        params[p].value_index(value).ok_or_else(|| SpaceError::UnknownValue {
            parameter: params[p].name().to_string(),
            value: value.to_string(),
            line: Some(line),
        })
    };

    let mut conditions = Vec::with_capacity(raw_conditions.len());
    for rc in &raw_conditions {
        let child = lookup(&rc.child, rc.line)?;
        let parent = lookup(&rc.parent, rc.line)?;
        let mut activating = Vec::with_capacity(rc.values.len());
        for v in &rc.values {
            let idx = value_of(parent, v, rc.line)?;
            if !activating.contains(&idx) {
                activating.push(idx);
            }
        }
        activating.sort_unstable();
        conditions.push(Condition { child, parent, activating });
    }

    let mut forbidden = Vec::with_capacity(raw_forbidden.len());
    for rf in &raw_forbidden {
        let mut assignments = Vec::with_capacity(rf.pairs.len());
        for (name, value) in &rf.pairs {
            let p = lookup(name, rf.line)?;
            assignments.push((p, value_of(p, value, rf.line)?));
        }
        forbidden.push(ForbiddenCombination { assignments });
    }

    ConfigurationSpace::new(params, conditions, forbidden)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_parameter() {
        let s = ConfigurationSpace::parse("alpha {1.1,1.3,1.5}[1.3]").unwrap();
        assert_eq!(s.len(), 1);
        let p = &s.parameters()[0];
        assert_eq!(p.domain().len(), 3);
        assert_eq!(p.default_value(), "1.3");
    }

    #[test]
    fn saps_like_space_size() {
        let text = "\
            alpha {1.01,1.066,1.126,1.189,1.256,1.326,1.4}[1.189]\n\
            rho {0,0.17,0.333,0.5,0.666,0.83,1}[0.5]\n\
            ps {0,0.033,0.066,0.1,0.133,0.166,0.2}[0.1]\n\
            wp {0,0.01,0.02,0.03,0.04,0.05,0.06}[0.03]\n";
        let s = ConfigurationSpace::parse(text).unwrap();
        assert_eq!(s.assignment_count(), 2401);
        assert_eq!(s.enumerate().len(), 2401);
    }

    #[test]
    fn cyclic_conditions_rejected() {
        let text = "a {on,off}[on]\nb {x,y}[x]\nb | a in {on}\na | b in {x}\n";
        assert!(matches!(
            ConfigurationSpace::parse(text),
            Err(SpaceError::CyclicConditions { .. })
        ));
    }

    #[test]
    fn whitespace_and_comments() {
        let text = "  # header\n\n a  { x , y } [ y ]  # trailing\n b {0,1}[0]\n b|a in{x}\n{ a = x ,b=1 }\n";
        let s = ConfigurationSpace::parse(text).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.conditions().len(), 1);
        assert_eq!(s.forbidden().len(), 1);
    }

    #[test]
    fn syntax_error_reports_position() {
        match ConfigurationSpace::parse("a {0,1}[0]\nb {0,1[0]\n") {
            Err(SpaceError::Syntax { line, column, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(column, 7);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_parameter() {
        assert!(matches!(
            ConfigurationSpace::parse("a {0,1}[0]\na {0,1}[1]\n"),
            Err(SpaceError::DuplicateParameter { line: Some(2), .. })
        ));
    }

    #[test]
    fn default_outside_domain() {
        assert!(matches!(
            ConfigurationSpace::parse("a {0,1}[2]\n"),
            Err(SpaceError::DefaultNotInDomain { .. })
        ));
    }

    #[test]
    fn infeasible_default() {
        assert!(matches!(
            ConfigurationSpace::parse("a {0,1}[0]\nb {0,1}[0]\n{a=0, b=0}\n"),
            Err(SpaceError::InfeasibleDefault)
        ));
    }

    #[test]
    fn two_conditions_for_one_child() {
        let text = "a {0,1}[0]\nb {0,1}[0]\nc {0,1}[0]\nc | a in {1}\nc | b in {1}\n";
        assert!(matches!(
            ConfigurationSpace::parse(text),
            Err(SpaceError::InvalidCondition { .. })
        ));
    }

    #[test]
    fn unknown_references() {
        assert!(matches!(
            ConfigurationSpace::parse("a {0,1}[0]\nb | z in {1}\n"),
            Err(SpaceError::UnknownParameter { .. })
        ));
        assert!(matches!(
            ConfigurationSpace::parse("a {0,1}[0]\nb {0,1}[0]\nb | a in {7}\n"),
            Err(SpaceError::UnknownValue { .. })
        ));
    }

    #[test]
    fn round_trip_display() {
        let text = "p {on,off}[off]\nc {x,y,z}[y]\nq {0,1}[0]\nc | p in {on}\n{c=x, q=1}\n";
        let s = ConfigurationSpace::parse(text).unwrap();
        let again = ConfigurationSpace::parse(&s.to_string()).unwrap();
        assert_eq!(s, again);
    }
}
