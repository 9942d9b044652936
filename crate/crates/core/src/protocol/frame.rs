use std::fmt;

use super::EncodeError;

/// Longest frame on the wire, CR LF included.
pub const MAX_FRAME_LEN: usize = 256;
pub const TERMINATOR: &[u8; 2] = b"\r\n";

/// A host-to-instrument command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandFrame {
    pub verb: String,
    pub args: Vec<String>,
    pub is_query: bool,
}

impl CommandFrame {
    pub fn set(verb: &str, args: &[&str]) -> Self {
        CommandFrame {
            verb: verb.to_string(),
            args: args.iter().map(|a| a.to_string()).collect(),
            is_query: false,
        }
    }

    pub fn query(verb: &str, args: &[&str]) -> Self {
        CommandFrame {
            is_query: true,
            ..Self::set(verb, args)
        }
    }

    pub fn encode(&self) -> Result<Vec<u8>, EncodeError> {
        if !is_valid_verb(&self.verb) {
            return Err(EncodeError::InvalidVerb(self.verb.clone()));
        }
        if let Some(bad) = self.args.iter().find(|a| !is_valid_arg(a)) {
            return Err(EncodeError::InvalidToken(bad.clone()));
        }
        let mut out = Vec::with_capacity(32);
        out.extend_from_slice(self.verb.as_bytes());
        if self.is_query {
            out.push(b'?');
        }
        for a in &self.args {
            out.push(b' ');
            out.extend_from_slice(a.as_bytes());
        }
        out.extend_from_slice(TERMINATOR);
        check_len(out)
    }
}

impl fmt::Display for CommandFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.verb, if self.is_query { "?" } else { "" })?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

/// An instrument-to-host response line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResponseFrame {
    /// `OK` for an acknowledged setting, or the comma-separated values of a query.
    Ok(Vec<String>),
    Err { code: u16, message: String },
}

impl ResponseFrame {
    pub fn ack() -> Self {
        ResponseFrame::Ok(Vec::new())
    }

    pub fn value(v: impl Into<String>) -> Self {
        ResponseFrame::Ok(vec![v.into()])
    }

    pub fn error(code: u16, message: impl Into<String>) -> Self {
        ResponseFrame::Err {
            code,
            message: message.into(),
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, ResponseFrame::Ok(_))
    }

    /// First payload value, if any.
    pub fn first(&self) -> Option<&str> {
        match self {
            ResponseFrame::Ok(v) => v.first().map(String::as_str),
            ResponseFrame::Err { .. } => None,
        }
    }

    pub fn encode(&self) -> Result<Vec<u8>, EncodeError> {
        let mut out = Vec::with_capacity(32);
        match self {
            ResponseFrame::Ok(values) if values.is_empty() => out.extend_from_slice(b"OK"),
            ResponseFrame::Ok(values) => {
                if let Some(bad) = values.iter().find(|v| !is_valid_value(v)) {
                    return Err(EncodeError::InvalidToken(bad.clone()));
                }
                if values.len() == 1 && values[0] == "OK" {
                    return Err(EncodeError::InvalidToken(values[0].clone()));
                }
                out.extend_from_slice(values.join(",").as_bytes());
            }
            ResponseFrame::Err { code, message } => {
                if !(100..=999).contains(code) {
                    return Err(EncodeError::InvalidErrorCode(*code));
                }
                if message.is_empty() || !message.bytes().all(|b| (0x20..=0x7e).contains(&b)) {
                    return Err(EncodeError::InvalidToken(message.clone()));
                }
                out.extend_from_slice(format!("ERR {code} {message}").as_bytes());
            }
        }
        out.extend_from_slice(TERMINATOR);
        check_len(out)
    }
}

impl fmt::Display for ResponseFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResponseFrame::Ok(v) if v.is_empty() => write!(f, "OK"),
            ResponseFrame::Ok(v) => write!(f, "{}", v.join(",")),
            ResponseFrame::Err { code, message } => write!(f, "ERR {code} {message}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    Command(CommandFrame),
    Response(ResponseFrame),
}

fn check_len(out: Vec<u8>) -> Result<Vec<u8>, EncodeError> {
    if out.len() > MAX_FRAME_LEN {
        Err(EncodeError::TooLong(out.len()))
    } else {
        Ok(out)
    }
}

pub(crate) fn is_valid_verb(verb: &str) -> bool {
    let bytes = verb.as_bytes();
    match bytes.first() {
        Some(b'A'..=b'Z') | Some(b'*') => {}
        _ => return false,
    }
    bytes[1..]
        .iter()
        .all(|b| b.is_ascii_uppercase() || b.is_ascii_digit() || *b == b':' || *b == b'*')
}

pub(crate) fn is_valid_arg(arg: &str) -> bool {
    !arg.is_empty() && arg.bytes().all(|b| b.is_ascii_graphic())
}

pub(crate) fn is_valid_value(v: &str) -> bool {
    !v.is_empty() && v.bytes().all(|b| b.is_ascii_graphic() && b != b',')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_examples() {
        assert_eq!(CommandFrame::query("READ", &[]).encode().unwrap(), b"READ?\r\n");
        assert_eq!(
            CommandFrame::set("GWAVE", &["410.0"]).encode().unwrap(),
            b"GWAVE 410.0\r\n"
        );
        assert_eq!(CommandFrame::query("PM:POW", &["1"]).encode().unwrap(), b"PM:POW? 1\r\n");
        assert_eq!(CommandFrame::query("*IDN", &[]).encode().unwrap(), b"*IDN?\r\n");
    }

    #[test]
    fn encode_rejects_bad_tokens() {
        assert!(matches!(
            CommandFrame::set("gwave", &[]).encode(),
            Err(EncodeError::InvalidVerb(_))
        ));
        assert!(matches!(
            CommandFrame::set("GWAVE", &["4 10"]).encode(),
            Err(EncodeError::InvalidToken(_))
        ));
        assert!(matches!(
            CommandFrame::set("GWAVE", &[""]).encode(),
            Err(EncodeError::InvalidToken(_))
        ));
        let long = "9".repeat(300);
        assert!(matches!(
            CommandFrame::set("GWAVE", &[&long]).encode(),
            Err(EncodeError::TooLong(_))
        ));
    }

    #[test]
    fn response_encoding() {
        assert_eq!(ResponseFrame::ack().encode().unwrap(), b"OK\r\n");
        assert_eq!(ResponseFrame::value("410.000").encode().unwrap(), b"410.000\r\n");
        assert_eq!(
            ResponseFrame::error(102, "BAD ARG").encode().unwrap(),
            b"ERR 102 BAD ARG\r\n"
        );
        assert!(ResponseFrame::error(42, "X").encode().is_err());
        assert!(ResponseFrame::value("OK").encode().is_err());
        assert!(ResponseFrame::Ok(vec!["a,b".into()]).encode().is_err());
    }
}
