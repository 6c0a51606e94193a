use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::FeedbackFunction;
use crate::state::RegisterState;
use crate::DEFAULT_MAX_ORDER;

/// One component of the functional state graph. Every component contains
/// exactly one cycle (possibly a loop); all other members feed into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub id: usize,
    /// Cycle states in successor order, starting from the smallest state id.
    pub cycle: Vec<u32>,
    /// Number of states in the component.
    pub size: usize,
    /// States with no predecessor, ascending.
    pub leaves: Vec<u32>,
}

/// The functional graph of an FSR: one successor per state, decomposed into
/// components. Immutable once built.
#[derive(Debug, Clone)]
pub struct StateGraph {
    order: usize,
    successor: Vec<u32>,
    component_of: Vec<u32>,
    on_cycle: Vec<bool>,
    in_degree: Vec<u8>,
    components: Vec<Component>,
}

impl StateGraph {
    /// Builds the graph, refusing orders above the default configuration cap.
    pub fn build(f: &FeedbackFunction) -> Result<Self> {
        Self::build_with_max_order(f, DEFAULT_MAX_ORDER)
    }

    pub fn build_with_max_order(f: &FeedbackFunction, max_order: usize) -> Result<Self> {
        let n = f.order();
        if n > max_order {
            return Err(Error::OrderOutOfRange {
                order: n,
                max: max_order,
            });
        }
        let size = 1usize << n;
        let successor: Vec<u32> = (0..size as u32).map(|v| f.successor_index(v)).collect();

        let mut in_degree = vec![0u8; size];
        for &s in &successor {
            in_degree[s as usize] += 1;
        }

        // Pointer-chasing with three colors, one O(2^n) sweep.
        let mut color = vec![0u8; size]; // 0 white, 1 on current path, 2 done
        let mut component_of = vec![u32::MAX; size];
        let mut on_cycle = vec![false; size];
        let mut cycles: Vec<Vec<u32>> = Vec::new();
        let mut path: Vec<u32> = Vec::new();
        for start in 0..size as u32 {
            if color[start as usize] != 0 {
                continue;
            }
            path.clear();
            let mut v = start;
            while color[v as usize] == 0 {
                color[v as usize] = 1;
                path.push(v);
                v = successor[v as usize];
            }
            let comp = if color[v as usize] == 1 {
                // New cycle: it occupies the tail of the current path.
                let pos = path.iter().rposition(|&u| u == v).unwrap();
                let cycle: Vec<u32> = path[pos..].to_vec();
                for &u in &cycle {
                    on_cycle[u as usize] = true;
                }
                cycles.push(cycle);
                (cycles.len() - 1) as u32
            } else {
                component_of[v as usize]
            };
            for &u in &path {
                color[u as usize] = 2;
                component_of[u as usize] = comp;
            }
        }

        // Renumber components by their smallest state id and orient each
        // cycle to start at its smallest state.
        let count = cycles.len();
        let mut min_state = vec![u32::MAX; count];
        for (v, &c) in component_of.iter().enumerate() {
            let c = c as usize;
            min_state[c] = min_state[c].min(v as u32);
        }
        let mut order_ids: Vec<usize> = (0..count).collect();
        order_ids.sort_by_key(|&c| min_state[c]);
        let mut remap = vec![0u32; count];
        for (new_id, &old_id) in order_ids.iter().enumerate() {
            remap[old_id] = new_id as u32;
        }
        for c in component_of.iter_mut() {
            *c = remap[*c as usize];
        }

        let mut sizes = vec![0usize; count];
        for v in 0..size {
            sizes[component_of[v] as usize] += 1;
        }
        let mut leaves: Vec<Vec<u32>> = vec![Vec::new(); count];
        for v in 0..size {
            if in_degree[v] == 0 {
                leaves[component_of[v] as usize].push(v as u32);
            }
        }

        let mut components: Vec<Component> = Vec::with_capacity(count);
        for (new_id, &old_id) in order_ids.iter().enumerate() {
            let mut cycle = cycles[old_id].clone();
            let min_pos = cycle
                .iter()
                .enumerate()
                .min_by_key(|(_, &v)| v)
                .map(|(i, _)| i)
                .unwrap();
            cycle.rotate_left(min_pos);
            components.push(Component {
                id: new_id,
                cycle,
                size: sizes[new_id],
                leaves: std::mem::take(&mut leaves[new_id]),
            });
        }

        Ok(StateGraph {
            order: n,
            successor,
            component_of,
            on_cycle,
            in_degree,
            components,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn state_count(&self) -> usize {
        self.successor.len()
    }

    pub fn successor(&self, v: u32) -> u32 {
        self.successor[v as usize]
    }

    pub fn component_of(&self, v: u32) -> usize {
        self.component_of[v as usize] as usize
    }

    pub fn is_on_cycle(&self, v: u32) -> bool {
        self.on_cycle[v as usize]
    }

    pub fn in_degree(&self, v: u32) -> u8 {
        self.in_degree[v as usize]
    }

    pub fn is_leaf(&self, v: u32) -> bool {
        self.in_degree[v as usize] == 0
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, id: usize) -> Result<&Component> {
        self.components.get(id).ok_or(Error::BadComponent(id))
    }

    /// Leaf states of one component, ascending.
    pub fn leaves_of(&self, id: usize) -> Result<&[u32]> {
        Ok(&self.component(id)?.leaves)
    }

    /// True iff the graph has exactly one component (a unique cycle or loop).
    pub fn unique_cycle_check(&self) -> bool {
        self.components.len() == 1
    }

    pub fn state(&self, v: u32) -> RegisterState {
        RegisterState::new(self.order, v).unwrap()
    }

    fn state_label(&self, v: u32) -> String {
        self.state(v).to_string()
    }

    /// DOT rendering: one cluster per component, cycle states filled, edges
    /// sorted by source id. Byte-deterministic for a given graph.
    pub fn to_dot(&self, decimal_labels: bool) -> String {
        let label = |v: u32| {
            if decimal_labels {
                v.to_string()
            } else {
                self.state_label(v)
            }
        };
        let mut out = String::from("digraph state_graph {\n");
        out.push_str("  node [shape=box];\n");
        for comp in &self.components {
            out.push_str(&format!("  subgraph cluster_{} {{\n", comp.id));
            out.push_str(&format!(
                "    label=\"component {} (cycle length {})\";\n",
                comp.id,
                comp.cycle.len()
            ));
            for v in 0..self.successor.len() as u32 {
                if self.component_of(v) != comp.id {
                    continue;
                }
                if self.on_cycle[v as usize] {
                    out.push_str(&format!(
                        "    \"{}\" [style=filled, fillcolor=lightgray];\n",
                        label(v)
                    ));
                } else {
                    out.push_str(&format!("    \"{}\";\n", label(v)));
                }
            }
            out.push_str("  }\n");
        }
        for v in 0..self.successor.len() as u32 {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\";\n",
                label(v),
                label(self.successor(v))
            ));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let components: Vec<ComponentJson> = self
            .components
            .iter()
            .map(|c| ComponentJson {
                cycle: c.cycle.iter().map(|&v| self.state_label(v)).collect(),
                size: c.size,
                leaves: c.leaves.iter().map(|&v| self.state_label(v)).collect(),
            })
            .collect();
        serde_json::json!({
            "n": self.order,
            "components": components,
        })
    }
}

#[derive(Serialize)]
struct ComponentJson {
    cycle: Vec<String>,
    size: usize,
    leaves: Vec<String>,
}
