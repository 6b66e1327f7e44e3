//! Parsing of `a..b` (inclusive) ranges and comma lists, e.g. `1..5,8,10..12`.

use std::str::FromStr;

pub fn parse_list<T>(text: &str) -> Result<Vec<T>, String>
where
    T: FromStr + Copy + PartialOrd + std::ops::AddAssign + From<u8>,
{
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err(format!("empty item in '{text}'"));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<T>()
                .map_err(|_| format!("'{s}' is not a valid number"))
        };
        match part.split_once("..") {
            Some((lo, hi)) => {
                let (mut v, hi) = (num(lo)?, num(hi.trim_start_matches('='))?);
                if v > hi {
                    return Err(format!("range '{part}' is empty"));
                }
                while v <= hi {
                    out.push(v);
                    v += T::from(1);
                }
            }
            None => out.push(num(part)?),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Windows(pub Vec<usize>);

#[derive(Clone, Debug)]
pub struct Seeds(pub Vec<u64>);

pub fn windows(text: &str) -> Result<Windows, String> {
    let ws = parse_list::<usize>(text)?;
    if ws.contains(&0) {
        return Err("windows must be at least 1".into());
    }
    Ok(Windows(ws))
}

pub fn seeds(text: &str) -> Result<Seeds, String> {
    parse_list::<u64>(text).map(Seeds)
}
