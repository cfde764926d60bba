//! JSON run descriptions and the coefficient-expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := number | '-' factor | '(' expr ')' | trig '(' phase ')'
//! trig   := 'sin' | 'cos'
//! phase  := linear combination of x1..x{2n} with integer coefficients,
//!           plus an optional constant (radians)
//! ```
//!
//! Inside a trig call x_mu stands for 2 pi x_mu / P_mu, so `sin(2*x1)` is
//! sin(4 pi x1 / P1) and every expression is periodic on the grid.
//! Coordinates may not appear outside trig calls.

use num_complex::Complex64 as C64;
use serde::Deserialize;
use serde_json::Value;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::field::{EndField, GenConnection, SpinorField, TorusGrid};
use crate::structures::standard_omega;

#[derive(Clone, Debug, PartialEq)]
enum Expr {
    Num(f64),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Trig { cos: bool, k: Vec<i64>, phase: f64 },
}

/// A parsed coefficient expression in `dim` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffExpr {
    dim: usize,
    root: Expr,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

fn err(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(err(format!("expected '{}' at offset {}", c as char, self.pos)))
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let exp_sign = (c == b'+' || c == b'-') && self.pos > start && matches!(self.src[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse().map_err(|_| err(format!("bad number '{text}' at offset {start}")))
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn coordinate(&self, name: &str) -> Result<usize> {
        let idx: usize = name
            .strip_prefix('x')
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(format!("unknown name '{name}'")))?;
        if idx == 0 || idx > self.dim {
            return Err(err(format!("coordinate {name} outside x1..x{}", self.dim)));
        }
        Ok(idx - 1)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while self.eat(b'*') {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Num(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let name = self.ident();
                let cos = match name.as_str() {
                    "sin" => false,
                    "cos" => true,
                    _ => {
                        self.coordinate(&name)?;
                        return Err(err(format!("coordinate {name} may only appear inside sin or cos")));
                    }
                };
                self.expect(b'(')?;
                let (k, phase) = self.phase()?;
                self.expect(b')')?;
                Ok(Expr::Trig { cos, k, phase })
            }
            other => Err(err(format!(
                "unexpected {} at offset {}",
                other.map_or("end of input".to_string(), |c| format!("'{}'", c as char)),
                self.pos
            ))),
        }
    }

    /// sum of [integer '*'] x_k and constant terms, each with a sign.
    fn phase(&mut self) -> Result<(Vec<i64>, f64)> {
        let mut k = vec![0i64; self.dim];
        let mut phase = 0.0;
        let mut first = true;
        loop {
            let sign = if self.eat(b'-') {
                -1.0
            } else if self.eat(b'+') || first {
                1.0
            } else {
                return Ok((k, phase));
            };
            first = false;
            let sign = if self.eat(b'-') { -sign } else { sign };
            match self.peek() {
                Some(c) if c.is_ascii_alphabetic() => {
                    let name = self.ident();
                    k[self.coordinate(&name)?] += sign as i64;
                }
                Some(c) if c.is_ascii_digit() || c == b'.' => {
                    let c = self.number()?;
                    if self.eat(b'*') {
                        let name = self.ident();
                        let axis = self.coordinate(&name)?;
                        if c.fract() != 0.0 {
                            return Err(err(format!("wave number {c} is not an integer")));
                        }
                        k[axis] += (sign * c) as i64;
                    } else {
                        phase += sign * c;
                    }
                }
                _ => return Err(err(format!("bad trig argument at offset {}", self.pos))),
            }
        }
    }
}

impl CoeffExpr {
    pub fn parse(src: &str, dim: usize) -> Result<Self> {
        let mut p = Parser { src: src.as_bytes(), pos: 0, dim };
        let root = p.expr()?;
        if p.peek().is_some() {
            return Err(err(format!("trailing input at offset {} in '{src}'", p.pos)));
        }
        Ok(Self { dim, root })
    }

    #[must_use]
    pub fn eval(&self, grid: &TorusGrid, p: usize) -> f64 {
        let theta: Vec<f64> = (0..self.dim).map(|mu| TAU * grid.coord(p, mu) / grid.periods()[mu]).collect();
        eval(&self.root, &theta)
    }

    #[must_use]
    pub fn sample(&self, grid: &TorusGrid) -> Vec<f64> {
        (0..grid.npts()).map(|p| self.eval(grid, p)).collect()
    }
}

fn eval(e: &Expr, theta: &[f64]) -> f64 {
    match e {
        Expr::Num(x) => *x,
        Expr::Neg(a) => -eval(a, theta),
        Expr::Add(a, b) => eval(a, theta) + eval(b, theta),
        Expr::Sub(a, b) => eval(a, theta) - eval(b, theta),
        Expr::Mul(a, b) => eval(a, theta) * eval(b, theta),
        Expr::Trig { cos, k, phase } => {
            let arg: f64 = k.iter().zip(theta).map(|(&k, t)| k as f64 * t).sum::<f64>() + phase;
            if *cos {
                arg.cos()
            } else {
                arg.sin()
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub periods: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiSpec {
    #[serde(default)]
    pub b: Option<Value>,
    #[serde(default)]
    pub omega: Option<Value>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleSpec {
    pub rank: usize,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionSpec {
    #[serde(default, rename = "A")]
    pub a: Option<Value>,
    #[serde(default, rename = "V")]
    pub v: Option<Value>,
    /// Constant background curvature i flux_{mu nu}, antisymmetric.
    #[serde(default)]
    pub flux: Option<Vec<Vec<f64>>>,
}

/// The JSON document accepted by `--input`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub n: usize,
    pub grid: GridSpec,
    #[serde(default)]
    pub psi: PsiSpec,
    #[serde(default)]
    pub bundle: Option<BundleSpec>,
    #[serde(default)]
    pub connection: Option<ConnectionSpec>,
}

/// Everything a command needs, validated.
#[derive(Clone, Debug)]
pub struct Setup {
    pub grid: TorusGrid,
    pub rank: usize,
    pub psi: SpinorField,
    /// Coefficient matrices when b and omega are constant.
    pub b_const: Option<Vec<f64>>,
    pub omega_const: Option<Vec<f64>>,
    /// `None` when the document gives no connection.
    pub connection: Option<GenConnection>,
}

/// Overrides from the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub rank: Option<usize>,
}

impl InputSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| err(format!("malformed input: {e}")))
    }

    /// The default document: n = 1, 32^2 unit torus, psi = e^{i omega}, r = 1.
    #[must_use]
    pub fn default_config() -> Self {
        Self {
            n: 1,
            grid: GridSpec { sizes: vec![32, 32], periods: None },
            psi: PsiSpec::default(),
            bundle: Some(BundleSpec { rank: 1 }),
            connection: None,
        }
    }

    pub fn build(&self, ov: &Overrides) -> Result<Setup> {
        let n = self.n;
        if n == 0 || n > crate::field::grid::MAX_GRID_N {
            return Err(err(format!("n = {n} outside 1..={}", crate::field::grid::MAX_GRID_N)));
        }
        let dim = 2 * n;
        let sizes = match ov.grid {
            Some(s) => vec![s; dim],
            None => self.grid.sizes.clone(),
        };
        let periods = self.grid.periods.clone().unwrap_or_else(|| vec![1.0; dim]);
        if periods.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(err("grid periods must be positive"));
        }
        let grid = TorusGrid::new(n, sizes, periods).map_err(|e| err(e.to_string()))?;
        let rank = ov.rank.or(self.bundle.as_ref().map(|b| b.rank)).unwrap_or(1);
        if rank == 0 {
            return Err(err("bundle rank must be positive"));
        }

        let b = match &self.psi.b {
            Some(v) => real_matrix(v, &grid, dim, "psi.b")?,
            None => vec![Field::Const(0.0); dim * dim],
        };
        let omega = match &self.psi.omega {
            Some(v) => real_matrix(v, &grid, dim, "psi.omega")?,
            None => standard_omega(n).into_iter().map(Field::Const).collect(),
        };
        check_antisymmetric(&b, &grid, "psi.b")?;
        check_antisymmetric(&omega, &grid, "psi.omega")?;
        let b_const = constants(&b);
        let omega_const = constants(&omega);
        let psi = SpinorField::from_matrices(&grid, |p| {
            (b.iter().map(|f| f.at(p)).collect(), omega.iter().map(|f| f.at(p)).collect())
        })?;

        let connection = match &self.connection {
            None => None,
            Some(c) => {
                let comps = |v: &Option<Value>, what: &str| -> Result<Vec<EndField>> {
                    match v {
                        None => Ok(vec![EndField::zeros(&grid, rank); dim]),
                        Some(v) => end_components(v, &grid, rank, dim, what),
                    }
                };
                let a = comps(&c.a, "connection.A")?;
                let v = comps(&c.v, "connection.V")?;
                let flux = match &c.flux {
                    None => vec![0.0; dim * dim],
                    Some(rows) => {
                        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                            return Err(err(format!("connection.flux must be {dim}x{dim}")));
                        }
                        rows.concat()
                    }
                };
                Some(GenConnection::with_flux(a, v, flux)?)
            }
        };
        Ok(Setup { grid, rank, psi, b_const, omega_const, connection })
    }
}

/// A real scalar field: constant, parsed expression or dump.
#[derive(Clone, Debug)]
enum Field {
    Const(f64),
    Samples(Vec<f64>),
}

impl Field {
    fn at(&self, p: usize) -> f64 {
        match self {
            Field::Const(c) => *c,
            Field::Samples(s) => s[p],
        }
    }
}

fn constants(m: &[Field]) -> Option<Vec<f64>> {
    m.iter()
        .map(|f| match f {
            Field::Const(c) => Some(*c),
            Field::Samples(_) => None,
        })
        .collect()
}

fn scalar(v: &Value, grid: &TorusGrid, what: &str) -> Result<Field> {
    match v {
        Value::Number(x) => Ok(Field::Const(x.as_f64().ok_or_else(|| err(format!("{what}: bad number")))?)),
        Value::String(s) => {
            let e = CoeffExpr::parse(s, grid.dim()).map_err(|e| err(format!("{what}: {e}")))?;
            if let Expr::Num(c) = e.root {
                return Ok(Field::Const(c));
            }
            Ok(Field::Samples(e.sample(grid)))
        }
        Value::Array(xs) => {
            if xs.len() != grid.npts() {
                return Err(err(format!("{what}: dump has {} values, grid has {}", xs.len(), grid.npts())));
            }
            let vals = xs
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| err(format!("{what}: dump entries must be numbers"))))
                .collect::<Result<_>>()?;
            Ok(Field::Samples(vals))
        }
        _ => Err(err(format!("{what}: expected a number, expression or row-major dump"))),
    }
}

fn real_matrix(v: &Value, grid: &TorusGrid, dim: usize, what: &str) -> Result<Vec<Field>> {
    let rows = v.as_array().filter(|r| r.len() == dim).ok_or_else(|| err(format!("{what}: expected {dim} rows")))?;
    let mut out = Vec::with_capacity(dim * dim);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().filter(|r| r.len() == dim).ok_or_else(|| err(format!("{what}[{i}]: expected {dim} entries")))?;
        for (j, x) in row.iter().enumerate() {
            out.push(scalar(x, grid, &format!("{what}[{i}][{j}]"))?);
        }
    }
    Ok(out)
}

fn check_antisymmetric(m: &[Field], grid: &TorusGrid, what: &str) -> Result<()> {
    let dim = grid.dim();
    for p in 0..grid.npts() {
        for i in 0..dim {
            for j in 0..dim {
                let s = m[i * dim + j].at(p) + m[j * dim + i].at(p);
                if s.abs() > 1e-12 {
                    return Err(err(format!("{what} is not antisymmetric at entry ({i}, {j})")));
                }
            }
        }
    }
    Ok(())
}

/// Entry: real field, or {"re": field, "im": field}.
fn complex_entry(v: &Value, grid: &TorusGrid, what: &str) -> Result<(Field, Field)> {
    match v {
        Value::Object(map) => {
            if let Some(k) = map.keys().find(|k| *k != "re" && *k != "im") {
                return Err(err(format!("{what}: unknown key '{k}'")));
            }
            let part = |k: &str| map.get(k).map_or(Ok(Field::Const(0.0)), |x| scalar(x, grid, &format!("{what}.{k}")));
            Ok((part("re")?, part("im")?))
        }
        other => Ok((scalar(other, grid, what)?, Field::Const(0.0))),
    }
}

fn is_matrix(v: &Value) -> bool {
    v.as_array().and_then(|a| a.first()).is_some_and(Value::is_array)
}

fn end_components(v: &Value, grid: &TorusGrid, r: usize, dim: usize, what: &str) -> Result<Vec<EndField>> {
    let comps = v.as_array().filter(|c| c.len() == dim).ok_or_else(|| err(format!("{what}: expected {dim} components")))?;
    comps
        .iter()
        .enumerate()
        .map(|(mu, c)| {
            let name = format!("{what}[{mu}]");
            let entries: Vec<(Field, Field)> = if is_matrix(c) {
                let rows = c.as_array().expect("array").clone();
                if rows.len() != r {
                    return Err(err(format!("{name}: expected {r} rows")));
                }
                let mut out = Vec::with_capacity(r * r);
                for (i, row) in rows.iter().enumerate() {
                    let row = row.as_array().filter(|x| x.len() == r).ok_or_else(|| err(format!("{name}[{i}]: expected {r} entries")))?;
                    for (j, x) in row.iter().enumerate() {
                        out.push(complex_entry(x, grid, &format!("{name}[{i}][{j}]"))?);
                    }
                }
                out
            } else if r == 1 {
                vec![complex_entry(c, grid, &name)?]
            } else {
                return Err(err(format!("{name}: expected an {r}x{r} matrix")));
            };
            Ok(EndField::from_fn(grid, r, |p, out| {
                for (o, (re, im)) in out.iter_mut().zip(&entries) {
                    *o = C64::new(re.at(p), im.at(p));
                }
            }))
        })
        .collect()
}

/// Dump of a connection in the input format (entries as {"re", "im"} dumps).
#[must_use]
pub fn connection_dump(conn: &GenConnection) -> Value {
    let r = conn.rank();
    let npts = conn.grid().npts();
    let comp = |f: &EndField| -> Value {
        let rows: Vec<Value> = (0..r)
            .map(|i| {
                let row: Vec<Value> = (0..r)
                    .map(|j| {
                        let re: Vec<f64> = (0..npts).map(|p| f.at(p)[i * r + j].re).collect();
                        let im: Vec<f64> = (0..npts).map(|p| f.at(p)[i * r + j].im).collect();
                        serde_json::json!({ "re": re, "im": im })
                    })
                    .collect();
                Value::Array(row)
            })
            .collect();
        Value::Array(rows)
    };
    let dim = conn.grid().dim();
    let flux: Vec<Vec<f64>> = conn.flux().chunks(dim).map(<[f64]>::to_vec).collect();
    serde_json::json!({
        "A": conn.a().iter().map(comp).collect::<Vec<_>>(),
        "V": conn.v().iter().map(comp).collect::<Vec<_>>(),
        "flux": flux,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TorusGrid {
        TorusGrid::new(1, vec![8, 8], vec![1.0, 2.0]).unwrap()
    }

    #[test]
    fn trig_arguments_are_scaled_by_period() {
        let g = grid();
        let e = CoeffExpr::parse("0.5*sin(2*x1) + cos(x2 - x1 + 0.25) * sin(x2)", 2).unwrap();
        for p in 0..g.npts() {
            let (x, y) = (TAU * g.coord(p, 0), TAU * g.coord(p, 1) / 2.0);
            let want = 0.5 * (2.0 * x).sin() + (y - x + 0.25).cos() * y.sin();
            assert!((e.eval(&g, p) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn grammar_errors_are_input_errors() {
        for bad in ["x1", "sin(0.5*x1)", "sin(x3)", "sin(x1", "2 +", "tan(x1)", "1 2"] {
            assert!(matches!(CoeffExpr::parse(bad, 2), Err(Error::Input(_))), "{bad}");
        }
        assert!(CoeffExpr::parse("-(1.5e-1)*-cos(-x2)", 2).is_ok());
    }

    #[test]
    fn document_round_trips_through_dump() {
        let text = r#"{"n":1,"grid":{"sizes":[8,8]},"bundle":{"rank":1},
            "connection":{"A":[{"im":"0.3*sin(x1)"},{"im":"0.2*cos(x1+x2)"}],"V":[0,{"im":0.1}]}}"#;
        let setup = InputSpec::from_json(text).unwrap().build(&Overrides::default()).unwrap();
        let conn = setup.connection.unwrap();
        let dumped = serde_json::json!({"n":1,"grid":{"sizes":[8,8]},"connection":connection_dump(&conn)});
        let again = InputSpec::from_json(&dumped.to_string()).unwrap().build(&Overrides::default()).unwrap();
        assert_eq!(again.connection.unwrap(), conn);
        assert_eq!(setup.omega_const, Some(standard_omega(1)));
    }

    #[test]
    fn non_closed_b_is_reported() {
        let text = r#"{"n":2,"grid":{"sizes":[8,8,8,8]},
            "psi":{"b":[[0,"0.3*sin(x3)",0,0],["-0.3*sin(x3)",0,0,0],[0,0,0,0],[0,0,0,0]]}}"#;
        let e = InputSpec::from_json(text).unwrap().build(&Overrides::default()).unwrap_err();
        assert!(matches!(e, Error::NotClosed(_)), "{e:?}");
    }

    #[test]
    fn shape_errors() {
        let bad = [
            r#"{"n":1,"grid":{"sizes":[8]}}"#,
            r#"{"n":3,"grid":{"sizes":[8,8]}}"#,
            r#"{"n":1,"grid":{"sizes":[8,8]},"psi":{"omega":[[0,1],[1,0]]}}"#,
            r#"{"n":1,"grid":{"sizes":[8,8]},"bundle":{"rank":2},"connection":{"A":[0,0]}}"#,
            r#"{"n":1,"grid":{"sizes":[8,8]},"extra":1}"#,
        ];
        for b in bad {
            let r = InputSpec::from_json(b).and_then(|s| s.build(&Overrides::default()));
            assert!(matches!(r, Err(Error::Input(_))), "{b}: {r:?}");
        }
    }
}
