//! Line-oriented text form.
//!
//! ```text
//! curve bn254
//! %0: ep = input #0
//! %1: fp = const [0x1]
//! %2: fpd(12) = cexp %1 #-0xd201000000010000
//! %3: fp = add %0, %1
//! ret %3
//! ```
//!
//! Constants are written as raw limb values. `#` marks an immediate: decimal
//! for small integers, hex for wide exponents.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Num;

use super::{Imm, IrError, Op, Opcode, Program, Ty, ValueId};
use crate::field::Fp;

fn hex(v: &BigInt) -> String {
    if v.sign() == num_bigint::Sign::Minus {
        format!("-0x{}", v.magnitude().to_str_radix(16))
    } else {
        format!("0x{}", v.to_str_radix(16))
    }
}

pub fn print(prog: &Program) -> String {
    let mut s = String::new();
    writeln!(s, "curve {}", prog.curve).unwrap();
    for (id, op) in prog.ops.iter().enumerate() {
        write!(s, "%{id}: {} = {}", op.ty, op.opcode).unwrap();
        let args: Vec<String> = op.args.iter().map(|a| format!("%{a}")).collect();
        if !args.is_empty() {
            write!(s, " {}", args.join(", ")).unwrap();
        }
        match &op.imm {
            Imm::None => {}
            Imm::Int(v) => write!(s, " #{v}").unwrap(),
            Imm::Big(v) => write!(s, " #{}", hex(v)).unwrap(),
            Imm::Const(c) => {
                let parts: Vec<String> = c.iter().map(|x| format!("0x{}", x.raw_big().to_str_radix(16))).collect();
                write!(s, " [{}]", parts.join(", ")).unwrap();
            }
        }
        s.push('\n');
    }
    let outs: Vec<String> = prog.outputs.iter().map(|o| format!("%{o}")).collect();
    writeln!(s, "ret {}", outs.join(", ")).unwrap();
    s
}

fn parse_int(s: &str) -> Result<BigInt, String> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let v = match body.strip_prefix("0x") {
        Some(h) => BigInt::from_str_radix(h, 16),
        None => BigInt::from_str_radix(body, 10),
    }
    .map_err(|e| format!("bad integer `{s}`: {e}"))?;
    Ok(if neg { -v } else { v })
}

fn parse_ref(s: &str) -> Result<ValueId, String> {
    s.trim()
        .strip_prefix('%')
        .ok_or_else(|| format!("expected %id, got `{s}`"))?
        .parse()
        .map_err(|e| format!("bad value id `{s}`: {e}"))
}

fn parse_op(line: &str, expect_id: usize) -> Result<Op, String> {
    let (lhs, rhs) = line.split_once('=').ok_or("missing `=`")?;
    let (id, ty) = lhs.split_once(':').ok_or("missing `:` after id")?;
    let id = parse_ref(id)?;
    if id as usize != expect_id {
        return Err(format!("ids must be dense and ordered: expected %{expect_id}, got %{id}"));
    }
    let ty: Ty = ty.parse()?;
    let rhs = rhs.trim();
    let (opcode, mut rest) = rhs.split_once(' ').unwrap_or((rhs, ""));
    let opcode: Opcode = opcode.parse()?;
    let mut imm = Imm::None;
    if let Some(i) = rest.find('[') {
        let body = rest[i + 1..].trim_end().strip_suffix(']').ok_or("unterminated constant")?;
        let vals = body
            .split(',')
            .map(|t| {
                let v = parse_int(t.trim())?;
                let m = v.to_biguint().ok_or("negative constant")?;
                Fp::from_raw_big(&m).ok_or_else(|| "constant too wide".to_string())
            })
            .collect::<Result<Vec<_>, String>>()?;
        imm = Imm::Const(vals);
        rest = &rest[..i];
    } else if let Some(i) = rest.find('#') {
        let t = rest[i + 1..].trim();
        let v = parse_int(t)?;
        imm = if t.contains("0x") {
            Imm::Big(v)
        } else {
            Imm::Int(i64::try_from(&v).map_err(|_| format!("immediate `{t}` out of range"))?)
        };
        rest = &rest[..i];
    }
    let args = rest
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(parse_ref)
        .collect::<Result<Vec<_>, String>>()?;
    Ok(Op::new(opcode, ty, &args, imm))
}

pub fn parse(text: &str) -> Result<Program, IrError> {
    let mut prog: Option<Program> = None;
    let mut done = false;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split(';').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let perr = |msg: String| IrError::Parse { line: n + 1, msg };
        if done {
            return Err(perr("content after `ret`".into()));
        }
        if let Some(c) = line.strip_prefix("curve ") {
            if prog.is_some() {
                return Err(perr("duplicate `curve` header".into()));
            }
            prog = Some(Program::new(c.trim()));
            continue;
        }
        let p = prog.as_mut().ok_or_else(|| perr("missing `curve` header".into()))?;
        if let Some(r) = line.strip_prefix("ret") {
            p.outputs = r.split(',').map(str::trim).filter(|t| !t.is_empty()).map(parse_ref).collect::<Result<_, _>>().map_err(perr)?;
            done = true;
            continue;
        }
        let op = parse_op(line, p.ops.len()).map_err(perr)?;
        p.push(op);
    }
    let p = prog.ok_or(IrError::Parse { line: 0, msg: "empty program".into() })?;
    if !done {
        return Err(IrError::Parse { line: text.lines().count(), msg: "missing `ret`".into() });
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::CurveSpec;
    use crate::ir::{codegen, lower, CodegenOptions};

    #[test]
    fn round_trips_high_and_low_programs() {
        let s = CurveSpec::shipped("bls12_381").unwrap();
        let hi = codegen(&s, CodegenOptions::default());
        assert_eq!(parse(&print(&hi)).unwrap(), hi);
        let lo = lower(&hi, &s, s.tower.default_selection()).unwrap();
        let t = print(&lo);
        assert_eq!(parse(&t).unwrap(), lo);
    }

    #[test]
    fn reports_line_of_error() {
        let e = parse("curve bn254\n%0: fp = input #0\n%1: fp = frobnicate %0\nret %1\n").unwrap_err();
        assert!(matches!(e, IrError::Parse { line: 3, .. }), "{e}");
        assert!(parse("curve x\n%1: fp = input #0\nret %1").is_err());
    }
}
