//! Class table lookups: `fields(C)`, `capOf(C)`, interface hierarchy.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::builtins;
use crate::syntax::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LookupError {
    #[error("unknown class or interface `{0}`")]
    Unknown(Name),
    #[error("`{0}` is an interface, not a class")]
    NotAClass(Name),
}

/// `capOf(C)`: whether a class carries the `capability` keyword.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cap {
    Capability,
    Plain,
}

/// Name-indexed view of a program's declarations plus the predefined
/// classes. When a name is declared twice the first declaration wins; the
/// well-formedness pass reports the duplicate.
#[derive(Clone, Debug)]
pub struct ClassTable {
    decls: HashMap<Name, Decl>,
}

impl ClassTable {
    pub fn new(program: &Program) -> ClassTable {
        let mut decls = HashMap::new();
        for d in builtins::declarations() {
            decls.insert(d.name().clone(), d);
        }
        for d in &program.decls {
            decls.entry(d.name().clone()).or_insert_with(|| d.clone());
        }
        ClassTable { decls }
    }

    pub fn get(&self, name: &str) -> Option<&Decl> {
        self.decls.get(name)
    }

    pub fn class(&self, name: &str) -> Result<&ClassDecl, LookupError> {
        match self.decls.get(name) {
            Some(Decl::Class(c)) => Ok(c),
            Some(Decl::Interface(i)) => Err(LookupError::NotAClass(i.name.clone())),
            None => Err(LookupError::Unknown(crate::syntax::name(name))),
        }
    }

    pub fn interface(&self, name: &str) -> Option<&InterfaceDecl> {
        match self.decls.get(name) {
            Some(Decl::Interface(i)) => Some(i),
            _ => None,
        }
    }

    pub fn is_interface(&self, name: &str) -> bool {
        self.interface(name).is_some()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.decls.contains_key(name)
    }

    /// Declared fields in declaration order.
    pub fn fields(&self, class: &str) -> Result<&[FieldDecl], LookupError> {
        Ok(&self.class(class)?.fields)
    }

    pub fn cap_of(&self, name: &str) -> Result<Cap, LookupError> {
        match self.decls.get(name) {
            Some(Decl::Class(c)) if c.capability => Ok(Cap::Capability),
            Some(_) => Ok(Cap::Plain),
            None => Err(LookupError::Unknown(crate::syntax::name(name))),
        }
    }

    /// Every interface reachable through `implements`/`extends`, excluding
    /// `name` itself. Cycles are tolerated.
    pub fn supertypes(&self, name: &str) -> BTreeSet<Name> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<Name> = self.direct_supertypes(name).to_vec();
        while let Some(n) = stack.pop() {
            if seen.insert(n.clone()) {
                stack.extend(self.direct_supertypes(&n).iter().cloned());
            }
        }
        seen
    }

    fn direct_supertypes(&self, name: &str) -> &[Name] {
        match self.decls.get(name) {
            Some(Decl::Class(c)) => &c.implements,
            Some(Decl::Interface(i)) => &i.extends,
            None => &[],
        }
    }

    /// Nominal subtyping: equal names, or `b` implemented/extended by `a`.
    pub fn is_subclass(&self, a: &str, b: &str) -> bool {
        a == b || self.supertypes(a).contains(b)
    }

    /// Finds the header declaring `method` for a class or interface. For
    /// interfaces the extended interfaces are searched as well.
    pub fn method_header(&self, owner: &str, method: &str) -> Option<&MethodHeader> {
        match self.decls.get(owner)? {
            Decl::Class(c) => c.method(method).map(|m| &m.header),
            Decl::Interface(i) => i.headers.iter().find(|h| &*h.name == method).or_else(|| {
                self.supertypes(owner).iter().find_map(|sup| {
                    self.interface(sup)?
                        .headers
                        .iter()
                        .find(|h| &*h.name == method)
                })
            }),
        }
    }

    pub fn user_decls(&self) -> impl Iterator<Item = &Decl> {
        self.decls.values().filter(|d| match d {
            Decl::Class(c) => c.origin == ClassOrigin::User,
            Decl::Interface(_) => true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_program;

    fn table(src: &str) -> ClassTable {
        ClassTable::new(&parse_program(src).unwrap())
    }

    #[test]
    fn fields_of_box_and_object() {
        let t = table("class F { F(){} } class Box { mut F f; Box(mut F f) { this.f=f; } }");
        let fs = t.fields("Box").unwrap();
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].ty, Type::new(Modifier::Mut, name("F")));
        assert_eq!(&*fs[0].name, "f");
        assert!(t.fields("Object").unwrap().is_empty());
        assert_eq!(t.fields("Nope"), Err(LookupError::Unknown(name("Nope"))));
    }

    #[test]
    fn cap_of_examples() {
        let t = table(
            "capability class ACController { Bool isOn; ACController(Bool isOn) {this.isOn=isOn;} }
             class ComfortComputer { }",
        );
        assert_eq!(t.cap_of("ACController"), Ok(Cap::Capability));
        assert_eq!(t.cap_of("ComfortComputer"), Ok(Cap::Plain));
        assert_eq!(t.cap_of("Object"), Ok(Cap::Plain));
        assert!(t.cap_of("Missing").is_err());
    }

    #[test]
    fn interface_hierarchy_is_transitive() {
        let t = table("interface A { } interface B extends A { } class C implements B { }");
        assert!(t.is_subclass("C", "A"));
        assert!(t.is_subclass("C", "B"));
        assert!(!t.is_subclass("A", "C"));
    }
}
