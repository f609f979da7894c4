use super::Sort;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgSort {
    Person,
    Object,
    Any,
}

/// Arity and argument sorts of one predicate symbol.
#[derive(Debug, Clone, Copy)]
pub struct PredicateSig {
    pub name: &'static str,
    pub arity: usize,
    pub args: [ArgSort; 2],
    /// Class predicates declare the sort of their argument.
    pub declares: Option<Sort>,
}

const fn class(name: &'static str, sort: Sort) -> PredicateSig {
    let arg = match sort {
        Sort::Person => ArgSort::Person,
        Sort::Object => ArgSort::Object,
    };
    PredicateSig {
        name,
        arity: 1,
        args: [arg, ArgSort::Any],
        declares: Some(sort),
    }
}

const fn unary(name: &'static str, arg: ArgSort) -> PredicateSig {
    PredicateSig {
        name,
        arity: 1,
        args: [arg, ArgSort::Any],
        declares: None,
    }
}

const fn binary(name: &'static str, a: ArgSort, b: ArgSort) -> PredicateSig {
    PredicateSig {
        name,
        arity: 2,
        args: [a, b],
        declares: None,
    }
}

/// Every predicate the corpus can produce.
pub const PREDICATES: [PredicateSig; 18] = [
    class("person", Sort::Person),
    class("chair", Sort::Object),
    class("bag", Sort::Object),
    class("telescope", Sort::Object),
    unary("yellow", ArgSort::Object),
    unary("green", ArgSort::Object),
    binary("with", ArgSort::Any, ArgSort::Object),
    binary("left_of", ArgSort::Any, ArgSort::Any),
    binary("right_of", ArgSort::Any, ArgSort::Any),
    binary("on", ArgSort::Object, ArgSort::Object),
    binary("approach", ArgSort::Person, ArgSort::Any),
    binary("leave", ArgSort::Person, ArgSort::Any),
    binary("pick_up", ArgSort::Person, ArgSort::Object),
    binary("put_down", ArgSort::Person, ArgSort::Object),
    binary("hold", ArgSort::Person, ArgSort::Object),
    binary("move", ArgSort::Person, ArgSort::Object),
    binary("look_at", ArgSort::Person, ArgSort::Any),
    binary("neq", ArgSort::Any, ArgSort::Any),
];

pub fn signature(predicate: &str) -> Option<&'static PredicateSig> {
    PREDICATES.iter().find(|p| p.name == predicate)
}
