use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

/// Interned identifier. Cheap to copy; compares by spelling.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Name(u32);

struct Interner {
    ids: HashMap<&'static str, u32>,
    strs: Vec<&'static str>,
}

fn interner() -> &'static RwLock<Interner> {
    static CELL: OnceLock<RwLock<Interner>> = OnceLock::new();
    CELL.get_or_init(|| {
        RwLock::new(Interner {
            ids: HashMap::new(),
            strs: Vec::new(),
        })
    })
}

impl Name {
    pub fn new(s: &str) -> Name {
        if let Some(&id) = interner().read().unwrap().ids.get(s) {
            return Name(id);
        }
        let mut w = interner().write().unwrap();
        if let Some(&id) = w.ids.get(s) {
            return Name(id);
        }
        let leaked: &'static str = Box::leak(s.to_owned().into_boxed_str());
        let id = w.strs.len() as u32;
        w.strs.push(leaked);
        w.ids.insert(leaked, id);
        Name(id)
    }

    pub fn as_str(self) -> &'static str {
        interner().read().unwrap().strs[self.0 as usize]
    }

    /// Spelling without any `#n` suffix.
    pub fn base(self) -> &'static str {
        let s = self.as_str();
        match s.find('#') {
            Some(i) => &s[..i],
            None => s,
        }
    }

    /// `true` for names produced by the tools rather than written by a user.
    pub fn is_generated(self) -> bool {
        self.as_str().contains('#')
    }
}

impl PartialOrd for Name {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Name {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.0 == other.0 {
            Ordering::Equal
        } else {
            self.as_str().cmp(other.as_str())
        }
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Name {
        Name::new(s)
    }
}

impl serde::Serialize for Name {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Picks `base`, `base#1`, `base#2`, ... : the first spelling rejected by `taken`.
pub fn fresh(base: &str, mut taken: impl FnMut(Name) -> bool) -> Name {
    let root = match base.find('#') {
        Some(i) => &base[..i],
        None => base,
    };
    let first = Name::new(root);
    if !taken(first) {
        return first;
    }
    let mut i = 1u32;
    loop {
        let n = Name::new(&format!("{root}#{i}"));
        if !taken(n) {
            return n;
        }
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_stable() {
        let a = Name::new("alpha");
        let b = Name::new("alpha");
        assert_eq!(a, b);
        assert_eq!(a.as_str(), "alpha");
    }

    #[test]
    fn order_follows_spelling() {
        let z = Name::new("zz_order");
        let a = Name::new("aa_order");
        assert!(a < z);
    }

    #[test]
    fn fresh_counts_up() {
        let used = [Name::new("c"), Name::new("c#1")];
        let n = fresh("c", |n| used.contains(&n));
        assert_eq!(n.as_str(), "c#2");
        assert_eq!(n.base(), "c");
    }
}
