//! Small-step Markov decision process semantics for programs.
//!
//! A state pairs a valuation with the statement left to run; the only final
//! states are those whose statement is `skip`. Each nondeterministic action a
//! state offers carries an exact probability distribution over successor
//! states. Demonic choice is the only source of multiple actions; every other
//! construct offers exactly one.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::Error;
use crate::eval::{eval_expr, Valuation, Value};
use crate::syntax::Stmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct State {
    pub env: Valuation,
    pub prog: Stmt,
}

impl State {
    pub fn new(env: Valuation, prog: Stmt) -> State {
        State { env, prog }
    }

    /// A state is final exactly when nothing is left to run.
    pub fn is_final(&self) -> bool {
        matches!(self.prog, Stmt::Skip)
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}>", self.env, self.prog)
    }
}

/// Which action a demonic state resolves to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionLabel {
    /// The single action of a non-demonic state.
    Only,
    Left,
    Right,
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionLabel::Only => write!(f, "only"),
            ActionLabel::Left => write!(f, "left"),
            ActionLabel::Right => write!(f, "right"),
        }
    }
}

/// One available action: a label and an exact distribution over successors.
/// The probabilities of `transitions` sum to exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionChoice {
    pub label: ActionLabel,
    pub transitions: Vec<(BigRational, State)>,
}

impl ActionChoice {
    fn single(label: ActionLabel, state: State) -> ActionChoice {
        ActionChoice {
            label,
            transitions: vec![(BigRational::one(), state)],
        }
    }
}

fn stuck(state: &State, cause: impl Into<String>) -> Error {
    Error::Stuck {
        state: Box::new(state.clone()),
        cause: cause.into(),
    }
}

/// The actions available at `state`, with their exact successor
/// distributions. Final states offer no actions.
///
/// The program is stuck (an error) when a branch probability evaluates
/// outside [0, 1], a guard is not boolean, or evaluation fails outright.
pub fn successors(state: &State) -> Result<Vec<ActionChoice>, Error> {
    let env = &state.env;
    match &state.prog {
        Stmt::Skip => Ok(Vec::new()),
        Stmt::Assign { var, expr } => {
            let value = eval_expr(env, expr).map_err(|e| stuck(state, e.to_string()))?;
            let next = State::new(env.with(var.clone(), value), Stmt::Skip);
            Ok(vec![ActionChoice::single(ActionLabel::Only, next)])
        }
        Stmt::Seq(first, rest) => {
            if matches!(**first, Stmt::Skip) {
                // A fully finished sequence collapses to the final state;
                // without this, `skip; skip` would be non-final yet offer
                // no actions at all.
                if matches!(**rest, Stmt::Skip) {
                    let next = State::new(env.clone(), Stmt::Skip);
                    return Ok(vec![ActionChoice::single(ActionLabel::Only, next)]);
                }
                // Otherwise `skip; s` steps exactly as `s` does.
                return successors(&State::new(env.clone(), (**rest).clone()));
            }
            let head = State::new(env.clone(), (**first).clone());
            let actions = successors(&head)?;
            Ok(actions
                .into_iter()
                .map(|action| ActionChoice {
                    label: action.label,
                    transitions: action
                        .transitions
                        .into_iter()
                        .map(|(p, s)| {
                            let prog = Stmt::seq(s.prog, (**rest).clone());
                            (p, State::new(s.env, prog))
                        })
                        .collect(),
                })
                .collect())
        }
        Stmt::Demonic(left, right) => Ok(vec![
            ActionChoice::single(ActionLabel::Left, State::new(env.clone(), (**left).clone())),
            ActionChoice::single(
                ActionLabel::Right,
                State::new(env.clone(), (**right).clone()),
            ),
        ]),
        Stmt::ProbChoice { prob, left, right } => {
            let value = eval_expr(env, prob).map_err(|e| stuck(state, e.to_string()))?;
            let p = match value.as_rational() {
                Some(p) if p >= BigRational::zero() && p <= BigRational::one() => p,
                _ => {
                    return Err(stuck(
                        state,
                        format!("branch probability evaluated to {value}, outside [0, 1]"),
                    ))
                }
            };
            let l = State::new(env.clone(), (**left).clone());
            let r = State::new(env.clone(), (**right).clone());
            // Degenerate probabilities collapse to a single successor so the
            // distribution never carries zero-weight entries.
            let transitions = if p.is_one() {
                vec![(BigRational::one(), l)]
            } else if p.is_zero() {
                vec![(BigRational::one(), r)]
            } else {
                let q = BigRational::one() - &p;
                vec![(p, l), (q, r)]
            };
            Ok(vec![ActionChoice {
                label: ActionLabel::Only,
                transitions,
            }])
        }
        Stmt::If {
            guard,
            then_branch,
            else_branch,
        } => {
            let taken = match eval_expr(env, guard).map_err(|e| stuck(state, e.to_string()))? {
                Value::Bool(true) => then_branch,
                Value::Bool(false) => else_branch,
                other => {
                    return Err(stuck(
                        state,
                        format!("guard evaluated to non-boolean {other}"),
                    ))
                }
            };
            let next = State::new(env.clone(), (**taken).clone());
            Ok(vec![ActionChoice::single(ActionLabel::Only, next)])
        }
        Stmt::While { guard, body } => {
            match eval_expr(env, guard).map_err(|e| stuck(state, e.to_string()))? {
                Value::Bool(true) => {
                    let prog = Stmt::seq((**body).clone(), state.prog.clone());
                    Ok(vec![ActionChoice::single(
                        ActionLabel::Only,
                        State::new(env.clone(), prog),
                    )])
                }
                Value::Bool(false) => Ok(vec![ActionChoice::single(
                    ActionLabel::Only,
                    State::new(env.clone(), Stmt::Skip),
                )]),
                other => Err(stuck(
                    state,
                    format!("guard evaluated to non-boolean {other}"),
                )),
            }
        }
    }
}

/// The reachable state graph, numbered by breadth-first discovery order from
/// the initial state.
#[derive(Debug, Clone)]
pub struct MdpGraph {
    pub states: Vec<State>,
    /// Edges `(source, action, probability, target)` in expansion order.
    pub edges: Vec<(usize, ActionLabel, BigRational, usize)>,
    /// True when the state budget ran out before the frontier emptied.
    pub truncated: bool,
}

/// Explore the graph reachable from `start`, visiting at most `max_states`
/// states.
pub fn explore(start: &State, max_states: u64) -> Result<MdpGraph, Error> {
    if max_states == 0 {
        return Err(Error::BudgetNotPositive);
    }
    let mut ids: HashMap<State, usize> = HashMap::new();
    let mut graph = MdpGraph {
        states: Vec::new(),
        edges: Vec::new(),
        truncated: false,
    };
    let mut queue = VecDeque::new();
    ids.insert(start.clone(), 0);
    graph.states.push(start.clone());
    queue.push_back(0usize);
    while let Some(id) = queue.pop_front() {
        let state = graph.states[id].clone();
        if state.is_final() {
            continue;
        }
        for action in successors(&state)? {
            for (p, next) in action.transitions {
                let next_id = match ids.get(&next) {
                    Some(&i) => i,
                    None => {
                        if graph.states.len() as u64 >= max_states {
                            graph.truncated = true;
                            continue;
                        }
                        let i = graph.states.len();
                        ids.insert(next.clone(), i);
                        graph.states.push(next);
                        queue.push_back(i);
                        i
                    }
                };
                graph.edges.push((id, action.label, p, next_id));
            }
        }
    }
    Ok(graph)
}
