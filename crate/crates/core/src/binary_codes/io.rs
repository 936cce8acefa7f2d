//! Line-oriented codebook files.
//!
//! The first line is `k n0 eps_num eps_den`; each following line is
//! `x_hex codeword_hex` for one message, in any order.

use std::io::{BufRead, Write};

use super::bounds::measure_list_bound;
use super::CodeHandle;
use crate::bits::{message_from_hex, message_hex, BitString};
use crate::error::{CodeError, ParseError};
use crate::ratio::Rational;

pub fn write_codebook<W: Write>(code: &CodeHandle, mut out: W) -> std::io::Result<()> {
    let eps = code.eps();
    writeln!(
        out,
        "{} {} {} {}",
        code.k(),
        code.n0(),
        eps.numer(),
        eps.denom()
    )?;
    for (x, word) in code.codebook().iter().enumerate() {
        writeln!(out, "{} {}", message_hex(x as u64, code.k()), word.to_hex())?;
    }
    Ok(())
}

/// Reads a codebook. Without an explicit `list_bound` the bound is measured
/// the same way as for freshly built codes.
pub fn read_codebook<R: BufRead>(
    input: R,
    list_bound: Option<usize>,
) -> Result<CodeHandle, CodeError> {
    let bad = |line: usize, reason: &str| {
        CodeError::Parse(ParseError::BadLine {
            line,
            reason: reason.to_string(),
        })
    };
    let mut lines = input.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((i, l)) => {
                let l = l.map_err(|e| bad(i + 1, &e.to_string()))?;
                if !l.trim().is_empty() {
                    break (i + 1, l);
                }
            }
            None => return Err(CodeError::Parse(ParseError::MissingField("header"))),
        }
    };
    let fields: Vec<i64> = header
        .1
        .split_whitespace()
        .map(|f| {
            f.parse::<i64>()
                .map_err(|_| CodeError::Parse(ParseError::BadNumber(f.to_string())))
        })
        .collect::<Result<_, _>>()?;
    let [k, n0, num, den] = fields[..] else {
        return Err(bad(header.0, "header needs k n0 eps_num eps_den"));
    };
    if !(0..=20).contains(&k) || n0 <= 0 || den <= 0 {
        return Err(bad(header.0, "header values out of range"));
    }
    let (k, n0) = (k as usize, n0 as usize);
    let mut words: Vec<Option<BitString>> = vec![None; 1 << k];
    for (i, line) in lines {
        let line = line.map_err(|e| bad(i + 1, &e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let (xh, ch) = line
            .trim()
            .split_once(' ')
            .ok_or_else(|| bad(i + 1, "expected `x_hex codeword_hex`"))?;
        let x = message_from_hex(xh.trim(), k)? as usize;
        let word = BitString::from_hex(ch.trim(), n0)?;
        if words[x].replace(word).is_some() {
            return Err(bad(i + 1, "message listed twice"));
        }
    }
    let words: Vec<BitString> = words
        .into_iter()
        .collect::<Option<_>>()
        .ok_or(CodeError::Parse(ParseError::MissingField("codeword")))?;
    let code =
        CodeHandle::from_codebook(k, Rational::new(num, den), words, list_bound.unwrap_or(1))?;
    Ok(match list_bound {
        Some(_) => code,
        None => {
            let measured = measure_list_bound(&code, n0 as u64).bound();
            code.with_list_bound(measured)
        }
    })
}
