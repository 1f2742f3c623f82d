//! Grid specifications accepted on the command line.
//!
//! * `a,b,c` lists values explicitly;
//! * `lo:hi:n` gives `n` linearly spaced points;
//! * `log:lo:hi:n` gives `n` logarithmically spaced points.

use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl Grid {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn count(s: &str) -> Result<usize, String> {
    s.trim()
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| format!("`{s}` is not a positive point count"))
}

fn spaced(lo: f64, hi: f64, n: usize, log: bool) -> Result<Vec<f64>, String> {
    if hi < lo {
        return Err(format!("range end {hi} is below its start {lo}"));
    }
    if log && lo <= 0.0 {
        return Err("logarithmic grids need a positive start".into());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|i| {
            let u = i as f64 / (n - 1) as f64;
            // pin the ends so `40:100:7` ends exactly on 100
            match i {
                0 => lo,
                k if k == n - 1 => hi,
                _ if log => lo * (hi / lo).powf(u),
                _ => lo + (hi - lo) * u,
            }
        })
        .collect())
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let values = match parts.as_slice() {
            [single] => single.split(',').map(number).collect::<Result<Vec<_>, _>>()?,
            [lo, hi, n] => spaced(number(lo)?, number(hi)?, count(n)?, false)?,
            ["log", lo, hi, n] => spaced(number(lo)?, number(hi)?, count(n)?, true)?,
            _ => return Err(format!("cannot parse grid `{s}` (use a,b,c or lo:hi:n or log:lo:hi:n)")),
        };
        if values.is_empty() {
            return Err("empty grid".into());
        }
        Ok(Grid(values))
    }
}
