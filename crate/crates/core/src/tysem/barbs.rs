use super::state::SymState;
use super::step::expand;
use crate::name::Name;
use crate::syntax::{Act, Type, TypeSystem};
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Barb {
    In(Name),
    Out(Name),
    Sync(Name),
    /// Ready to close.
    End(Name),
    /// A closed channel.
    Closed(Name),
    BufSend(Name),
    BufRecv(Name),
    /// An external choice whose guards are all inputs or outputs.
    Multi(Vec<Barb>),
}

impl Barb {
    pub fn channel(&self) -> Option<Name> {
        match self {
            Barb::In(a)
            | Barb::Out(a)
            | Barb::Sync(a)
            | Barb::End(a)
            | Barb::Closed(a)
            | Barb::BufSend(a)
            | Barb::BufRecv(a) => Some(*a),
            Barb::Multi(_) => None,
        }
    }

    pub fn rename(&self, f: &impl Fn(Name) -> Name) -> Barb {
        match self {
            Barb::In(a) => Barb::In(f(*a)),
            Barb::Out(a) => Barb::Out(f(*a)),
            Barb::Sync(a) => Barb::Sync(f(*a)),
            Barb::End(a) => Barb::End(f(*a)),
            Barb::Closed(a) => Barb::Closed(f(*a)),
            Barb::BufSend(a) => Barb::BufSend(f(*a)),
            Barb::BufRecv(a) => Barb::BufRecv(f(*a)),
            Barb::Multi(bs) => Barb::Multi(bs.iter().map(|b| b.rename(f)).collect()),
        }
    }
}

impl fmt::Display for Barb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Barb::In(a) => write!(f, "?{a}"),
            Barb::Out(a) => write!(f, "!{a}"),
            Barb::Sync(a) => write!(f, "[{a}]"),
            Barb::End(a) => write!(f, "end[{a}]"),
            Barb::Closed(a) => write!(f, "closed[{a}]"),
            Barb::BufSend(a) => write!(f, "bufsend[{a}]"),
            Barb::BufRecv(a) => write!(f, "bufrecv[{a}]"),
            Barb::Multi(bs) => {
                f.write_str("{")?;
                for (i, b) in bs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{b}")?;
                }
                f.write_str("}")
            }
        }
    }
}

#[derive(Default)]
struct Ready {
    send: BTreeSet<Name>,
    recv: BTreeSet<Name>,
    closed: bool,
    buf_send: bool,
    buf_recv: bool,
}

fn ready(atom: &Type) -> Ready {
    let mut r = Ready::default();
    let note = |a: &Act, r: &mut Ready| match a {
        Act::Send(x) => {
            r.send.insert(*x);
        }
        Act::Recv(x) => {
            r.recv.insert(*x);
        }
        Act::Tau => {}
    };
    match atom {
        Type::Pre(a, _) => note(a, &mut r),
        Type::Branch(bs) => bs.iter().for_each(|(a, _)| note(a, &mut r)),
        Type::Closed(_) => r.closed = true,
        Type::Buf(_, c, n) => {
            r.buf_send = c < n;
            r.buf_recv = *c >= 1;
        }
        _ => {}
    }
    r
}

/// Barbs of a term with its restrictions stripped; calls unfold freely.
pub fn type_barbs(s: &SymState, sys: &TypeSystem) -> BTreeSet<Barb> {
    let allow = |_: &[Name]| true;
    let mut atoms = Vec::new();
    for t in &s.threads {
        expand(t, sys, &allow, &mut atoms);
    }
    barbs_of_atoms(&atoms)
}

pub(crate) fn barbs_of_atoms(atoms: &[Type]) -> BTreeSet<Barb> {
    let mut out = BTreeSet::new();
    for t in atoms {
        match t {
            Type::Pre(Act::Send(a), _) => {
                out.insert(Barb::Out(*a));
            }
            Type::Pre(Act::Recv(a), _) => {
                out.insert(Barb::In(*a));
            }
            Type::End(a, _) => {
                out.insert(Barb::End(*a));
            }
            Type::Closed(a) => {
                out.insert(Barb::Closed(*a));
            }
            Type::Buf(a, c, n) => {
                if c < n {
                    out.insert(Barb::BufSend(*a));
                }
                if *c >= 1 {
                    out.insert(Barb::BufRecv(*a));
                }
            }
            Type::Branch(bs) if !bs.iter().any(|(a, _)| *a == Act::Tau) => {
                let mut ms: Vec<Barb> = bs
                    .iter()
                    .map(|(a, _)| match a {
                        Act::Send(x) => Barb::Out(*x),
                        Act::Recv(x) => Barb::In(*x),
                        Act::Tau => unreachable!(),
                    })
                    .collect();
                ms.sort();
                ms.dedup();
                out.insert(Barb::Multi(ms));
            }
            _ => {}
        }
    }
    let rs: Vec<(Ready, Option<Name>)> = atoms
        .iter()
        .map(|t| {
            let chan = match t {
                Type::Buf(a, ..) | Type::Closed(a) => Some(*a),
                _ => None,
            };
            (ready(t), chan)
        })
        .collect();
    for (i, (p, pc)) in rs.iter().enumerate() {
        for (j, (q, qc)) in rs.iter().enumerate() {
            if i == j {
                continue;
            }
            for a in &p.send {
                if q.recv.contains(a) || (q.buf_send && *qc == Some(*a)) {
                    out.insert(Barb::Sync(*a));
                }
            }
            if let Some(a) = pc {
                if (p.closed || p.buf_recv) && q.recv.contains(a) {
                    out.insert(Barb::Sync(*a));
                }
            }
        }
    }
    out
}
