use super::{OntologyError, Pos, Synset, SynsetId};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};

/// Three rooted synset trees, keyed by part of speech.
///
/// Synsets are stored in canonical order: adjective tree, then verb tree,
/// then noun tree, each in preorder with siblings sorted by `(lemma, sense)`.
/// A built forest is immutable; [`SynsetForest::propagate_scores`] returns a
/// new one.
#[derive(Debug, Clone, PartialEq)]
pub struct SynsetForest {
    synsets: Vec<Synset>,
    by_id: HashMap<SynsetId, usize>,
    children: Vec<Vec<usize>>,
    depth: Vec<u32>,
    roots: [usize; 3],
    warnings: Vec<ForestWarning>,
}

/// Non-fatal findings from [`SynsetForest::build`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum ForestWarning {
    /// The same lemma appears under several senses in one tree.
    PolysemousLemma { pos: Pos, lemma: String, senses: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeSummary {
    pub pos: Pos,
    pub nodes: usize,
    /// Number of levels; a lone root has depth 1.
    pub depth: u32,
    pub leaves: usize,
    pub max_branching: usize,
    pub mean_branching: f64,
    pub scored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForestSummary {
    pub trees: Vec<TreeSummary>,
    pub total: usize,
    pub warnings: Vec<ForestWarning>,
}

impl ForestSummary {
    pub fn tree(&self, pos: Pos) -> &TreeSummary {
        &self.trees[pos.index()]
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<10} {:>6} {:>6} {:>7} {:>7} {:>9} {:>7}\n",
            "tree", "nodes", "depth", "leaves", "max-br", "mean-br", "scored"
        ));
        for t in &self.trees {
            out.push_str(&format!(
                "{:<10} {:>6} {:>6} {:>7} {:>7} {:>9.2} {:>7}\n",
                t.pos.as_str(),
                t.nodes,
                t.depth,
                t.leaves,
                t.max_branching,
                t.mean_branching,
                t.scored
            ));
        }
        out.push_str(&format!("total synsets: {}\n", self.total));
        for w in &self.warnings {
            match w {
                ForestWarning::PolysemousLemma { pos, lemma, senses } => {
                    out.push_str(&format!("warning: {pos} lemma `{lemma}` has senses {senses:?}\n"))
                }
            }
        }
        out
    }
}

/// Nested view of one tree, as served to the annotation UI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeNode {
    pub id: SynsetId,
    pub lemma: String,
    pub sense: u32,
    pub gloss: String,
    pub score: Option<f64>,
    pub children: Vec<TreeNode>,
}

impl SynsetForest {
    /// Validates lexicon records and assembles the three trees.
    ///
    /// Checks run in a fixed order so the reported error is deterministic:
    /// per-record fields (lemma, sense, score range), duplicate ids, parent
    /// resolution, roots, `(lemma, sense)` uniqueness per tree, and finally
    /// reachability from the root.
    pub fn build(records: Vec<Synset>) -> Result<SynsetForest, OntologyError> {
        let mut records = records;
        for r in &mut records {
            r.lemma = r.lemma.trim().to_lowercase();
            if r.lemma.is_empty() {
                return Err(OntologyError::EmptyLemma { id: r.id.clone() });
            }
            if r.sense == 0 {
                return Err(OntologyError::InvalidSense { id: r.id.clone() });
            }
            if let Some(score) = r.score {
                if !(-1.0..=1.0).contains(&score) {
                    return Err(OntologyError::ScoreOutOfRange { id: r.id.clone(), score });
                }
            }
        }

        let mut by_input: HashMap<&SynsetId, usize> = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if by_input.insert(&r.id, i).is_some() {
                return Err(OntologyError::DuplicateId(r.id.clone()));
            }
        }

        for r in &records {
            if let Some(parent) = &r.parent {
                match by_input.get(parent) {
                    None => {
                        return Err(OntologyError::DanglingParent {
                            id: r.id.clone(),
                            parent: parent.clone(),
                        })
                    }
                    Some(&p) if records[p].pos != r.pos => {
                        return Err(OntologyError::CrossPosParent {
                            id: r.id.clone(),
                            parent: parent.clone(),
                        })
                    }
                    Some(_) => {}
                }
            }
        }

        let mut roots_by_pos: [Vec<usize>; 3] = Default::default();
        for (i, r) in records.iter().enumerate() {
            if r.parent.is_none() {
                roots_by_pos[r.pos.index()].push(i);
            }
        }
        for pos in Pos::ALL {
            let roots = &roots_by_pos[pos.index()];
            match roots.len() {
                0 => return Err(OntologyError::MissingRoot(pos)),
                1 => {}
                _ => {
                    return Err(OntologyError::MultipleRoots {
                        pos,
                        roots: roots.iter().map(|&i| records[i].id.clone()).collect(),
                    })
                }
            }
        }

        let mut seen: HashMap<(Pos, &str, u32), &SynsetId> = HashMap::new();
        let mut senses: BTreeMap<(Pos, &str), Vec<u32>> = BTreeMap::new();
        for r in &records {
            if let Some(first) = seen.insert((r.pos, &r.lemma, r.sense), &r.id) {
                return Err(OntologyError::DiscrepancyViolation {
                    pos: r.pos,
                    lemma: r.lemma.clone(),
                    sense: r.sense,
                    first: first.clone(),
                    second: r.id.clone(),
                });
            }
            senses.entry((r.pos, &r.lemma)).or_default().push(r.sense);
        }
        let warnings = senses
            .into_iter()
            .filter(|(_, s)| s.len() > 1)
            .map(|((pos, lemma), mut senses)| {
                senses.sort_unstable();
                ForestWarning::PolysemousLemma { pos, lemma: lemma.to_owned(), senses }
            })
            .collect();

        // Children lists over input indices, sorted into canonical sibling order.
        let mut input_children: Vec<Vec<usize>> = vec![Vec::new(); records.len()];
        for (i, r) in records.iter().enumerate() {
            if let Some(parent) = &r.parent {
                input_children[by_input[parent]].push(i);
            }
        }
        for kids in &mut input_children {
            kids.sort_by(|&a, &b| {
                let (ra, rb) = (&records[a], &records[b]);
                (&ra.lemma, ra.sense, &ra.id).cmp(&(&rb.lemma, rb.sense, &rb.id))
            });
        }

        // Preorder walk from each root; anything left unvisited hangs off a cycle.
        let mut order: Vec<usize> = Vec::with_capacity(records.len());
        let mut depth_in: Vec<u32> = vec![0; records.len()];
        for pos in Pos::ALL {
            let root = roots_by_pos[pos.index()][0];
            let mut stack = vec![root];
            depth_in[root] = 1;
            while let Some(node) = stack.pop() {
                order.push(node);
                for &c in input_children[node].iter().rev() {
                    depth_in[c] = depth_in[node] + 1;
                    stack.push(c);
                }
            }
        }
        if order.len() != records.len() {
            let mut visited = vec![false; records.len()];
            for &i in &order {
                visited[i] = true;
            }
            let first = visited.iter().position(|v| !v).expect("some node unvisited");
            return Err(OntologyError::Cycle { id: records[first].id.clone() });
        }

        let mut new_index = vec![0usize; records.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let children = order
            .iter()
            .map(|&old| input_children[old].iter().map(|&c| new_index[c]).collect())
            .collect();
        let depth = order.iter().map(|&old| depth_in[old]).collect();
        let roots = [
            new_index[roots_by_pos[0][0]],
            new_index[roots_by_pos[1][0]],
            new_index[roots_by_pos[2][0]],
        ];
        let mut slots: Vec<Option<Synset>> = records.into_iter().map(Some).collect();
        let synsets: Vec<Synset> = order.iter().map(|&old| slots[old].take().expect("each node once")).collect();
        let by_id = synsets.iter().enumerate().map(|(i, s)| (s.id.clone(), i)).collect();

        Ok(SynsetForest { synsets, by_id, children, depth, roots, warnings })
    }

    /// Fills every missing score with the score of the nearest scored
    /// ancestor. Present scores are left alone.
    pub fn propagate_scores(&self) -> Result<SynsetForest, OntologyError> {
        for &root in &self.roots {
            if self.synsets[root].score.is_none() {
                return Err(OntologyError::UnscoredRoot(self.synsets[root].id.clone()));
            }
        }
        let mut out = self.clone();
        // Preorder storage means a parent is always filled before its children.
        for i in 0..out.synsets.len() {
            if out.synsets[i].score.is_none() {
                let parent = out.synsets[i].parent.as_ref().expect("non-root has a parent");
                let p = out.by_id[parent];
                out.synsets[i].score = out.synsets[p].score;
            }
        }
        Ok(out)
    }

    pub fn get(&self, id: &SynsetId) -> Option<&Synset> {
        self.by_id.get(id).map(|&i| &self.synsets[i])
    }

    pub fn contains(&self, id: &SynsetId) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn root(&self, pos: Pos) -> &Synset {
        &self.synsets[self.roots[pos.index()]]
    }

    pub fn is_root(&self, id: &SynsetId) -> bool {
        self.by_id.get(id).is_some_and(|i| self.roots.contains(i))
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    /// All synsets in canonical order.
    pub fn synsets(&self) -> &[Synset] {
        &self.synsets
    }

    pub fn synsets_of(&self, pos: Pos) -> impl Iterator<Item = &Synset> {
        self.synsets.iter().filter(move |s| s.pos == pos)
    }

    pub fn children(&self, id: &SynsetId) -> impl Iterator<Item = &Synset> {
        let kids: &[usize] = self.by_id.get(id).map(|&i| self.children[i].as_slice()).unwrap_or(&[]);
        kids.iter().map(|&c| &self.synsets[c])
    }

    /// Levels from the root, the root itself being at depth 1.
    pub fn depth_of(&self, id: &SynsetId) -> Option<u32> {
        self.by_id.get(id).map(|&i| self.depth[i])
    }

    /// Ids from `id` up to and including its root.
    pub fn path_to_root(&self, id: &SynsetId) -> Vec<SynsetId> {
        let mut path = Vec::new();
        let mut cur = self.get(id);
        while let Some(s) = cur {
            path.push(s.id.clone());
            cur = s.parent.as_ref().and_then(|p| self.get(p));
            if path.len() > self.synsets.len() {
                break;
            }
        }
        path
    }

    pub fn warnings(&self) -> &[ForestWarning] {
        &self.warnings
    }

    /// True when every synset has a score, i.e. after propagation.
    pub fn fully_scored(&self) -> bool {
        self.synsets.iter().all(|s| s.score.is_some())
    }

    /// Coverage report: node counts, depth and branching per tree.
    pub fn summary(&self) -> ForestSummary {
        let trees = Pos::ALL
            .iter()
            .map(|&pos| {
                let members: Vec<usize> = (0..self.synsets.len()).filter(|&i| self.synsets[i].pos == pos).collect();
                let internal: Vec<usize> = members.iter().map(|&i| self.children[i].len()).filter(|&c| c > 0).collect();
                TreeSummary {
                    pos,
                    nodes: members.len(),
                    depth: members.iter().map(|&i| self.depth[i]).max().unwrap_or(0),
                    leaves: members.iter().filter(|&&i| self.children[i].is_empty()).count(),
                    max_branching: internal.iter().copied().max().unwrap_or(0),
                    mean_branching: if internal.is_empty() {
                        0.0
                    } else {
                        internal.iter().sum::<usize>() as f64 / internal.len() as f64
                    },
                    scored: members.iter().filter(|&&i| self.synsets[i].score.is_some()).count(),
                }
            })
            .collect();
        ForestSummary { trees, total: self.synsets.len(), warnings: self.warnings.clone() }
    }

    /// Case-insensitive lemma prefix search, ordered by `(lemma, sense)`.
    pub fn search(&self, query: &str, pos: Option<Pos>) -> Vec<&Synset> {
        let query = query.trim().to_lowercase();
        let mut hits: Vec<&Synset> = self
            .synsets
            .iter()
            .filter(|s| pos.is_none_or(|p| s.pos == p))
            .filter(|s| s.lemma.starts_with(&query))
            .collect();
        hits.sort_by(|a, b| (&a.lemma, a.sense, a.pos, &a.id).cmp(&(&b.lemma, b.sense, b.pos, &b.id)));
        hits
    }

    pub fn tree(&self, pos: Pos) -> TreeNode {
        self.node(self.roots[pos.index()])
    }

    fn node(&self, i: usize) -> TreeNode {
        let s = &self.synsets[i];
        TreeNode {
            id: s.id.clone(),
            lemma: s.lemma.clone(),
            sense: s.sense,
            gloss: s.gloss.clone(),
            score: s.score,
            children: self.children[i].iter().map(|&c| self.node(c)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn rec(id: &str, pos: Pos, score: Option<f64>, parent: Option<&str>) -> Synset {
        let lemma = id.split('.').next().unwrap().to_owned();
        Synset {
            id: SynsetId::new(id),
            lemma,
            sense: 1,
            pos,
            gloss: String::new(),
            score,
            parent: parent.map(SynsetId::new),
        }
    }

    /// Root plus three children in each tree.
    fn twelve() -> Vec<Synset> {
        let mut v = Vec::new();
        for (pos, root, kids) in [
            (Pos::Adjective, "adj", ["cute", "sad", "old"]),
            (Pos::Verb, "act", ["fall", "smile", "run"]),
            (Pos::Noun, "entity", ["dog", "cup", "girl"]),
        ] {
            v.push(rec(root, pos, Some(0.0), None));
            for k in kids {
                v.push(rec(k, pos, None, Some(root)));
            }
        }
        v
    }

    #[test]
    fn minimal_forest_has_three_single_node_trees() {
        let f = SynsetForest::build(vec![
            rec("a", Pos::Adjective, None, None),
            rec("v", Pos::Verb, None, None),
            rec("n", Pos::Noun, None, None),
        ])
        .unwrap();
        let s = f.summary();
        for pos in Pos::ALL {
            assert_eq!(s.tree(pos).nodes, 1);
            assert_eq!(s.tree(pos).depth, 1);
        }
    }

    #[test]
    fn twelve_synset_fixture_counts_and_depths() {
        let f = SynsetForest::build(twelve()).unwrap();
        let s = f.summary();
        for pos in Pos::ALL {
            assert_eq!(s.tree(pos).nodes, 4);
            assert_eq!(s.tree(pos).depth, 2);
            assert_eq!(s.tree(pos).leaves, 3);
            assert_eq!(s.tree(pos).max_branching, 3);
        }
    }

    #[test]
    fn score_out_of_range() {
        let mut v = twelve();
        v[1].score = Some(1.5);
        assert!(matches!(SynsetForest::build(v), Err(OntologyError::ScoreOutOfRange { score, .. }) if score == 1.5));
    }

    #[test]
    fn nan_score_rejected() {
        let mut v = twelve();
        v[2].score = Some(f64::NAN);
        assert!(matches!(SynsetForest::build(v), Err(OntologyError::ScoreOutOfRange { .. })));
    }

    #[test]
    fn structural_errors() {
        let mut v = twelve();
        v[5].parent = Some(SynsetId::new("nowhere"));
        assert!(matches!(SynsetForest::build(v), Err(OntologyError::DanglingParent { .. })));

        let mut v = twelve();
        v[5].parent = Some(SynsetId::new("adj"));
        assert!(matches!(SynsetForest::build(v), Err(OntologyError::CrossPosParent { .. })));

        let mut v = twelve();
        v[5].parent = None;
        assert!(matches!(SynsetForest::build(v), Err(OntologyError::MultipleRoots { pos: Pos::Verb, .. })));

        let mut v = twelve();
        v.retain(|s| s.pos != Pos::Noun);
        assert_eq!(SynsetForest::build(v), Err(OntologyError::MissingRoot(Pos::Noun)));

        let mut v = twelve();
        v.push(rec("cute", Pos::Adjective, None, Some("adj")));
        v.last_mut().unwrap().id = SynsetId::new("cute.dup");
        assert!(matches!(SynsetForest::build(v), Err(OntologyError::DiscrepancyViolation { .. })));

        let mut v = twelve();
        v.push(v[1].clone());
        assert!(matches!(SynsetForest::build(v), Err(OntologyError::DuplicateId(_))));
    }

    #[test]
    fn parent_cycle_detected() {
        let mut v = twelve();
        v.push(rec("x", Pos::Noun, None, Some("y")));
        v.push(rec("y", Pos::Noun, None, Some("x")));
        assert_eq!(SynsetForest::build(v), Err(OntologyError::Cycle { id: SynsetId::new("x") }));
    }

    #[test]
    fn polysemy_is_a_warning() {
        let mut v = twelve();
        let mut second = rec("cute.2", Pos::Adjective, None, Some("adj"));
        second.lemma = "cute".into();
        second.sense = 2;
        v.push(second);
        let f = SynsetForest::build(v).unwrap();
        assert_eq!(
            f.warnings(),
            &[ForestWarning::PolysemousLemma { pos: Pos::Adjective, lemma: "cute".into(), senses: vec![1, 2] }]
        );
    }

    #[test]
    fn propagation_rules() {
        let v = vec![
            rec("adj", Pos::Adjective, Some(0.0), None),
            rec("kid", Pos::Adjective, None, Some("adj")),
            rec("act", Pos::Verb, Some(0.8), None),
            rec("a", Pos::Verb, None, Some("act")),
            rec("b", Pos::Verb, None, Some("a")),
            rec("entity", Pos::Noun, Some(0.8), None),
            rec("c", Pos::Noun, Some(-0.3), Some("entity")),
            rec("d", Pos::Noun, None, Some("c")),
        ];
        let f = SynsetForest::build(v).unwrap().propagate_scores().unwrap();
        let score = |id: &str| f.get(&SynsetId::new(id)).unwrap().score;
        assert_eq!(score("kid"), Some(0.0));
        assert_eq!(score("a"), Some(0.8));
        assert_eq!(score("b"), Some(0.8));
        assert_eq!(score("c"), Some(-0.3));
        assert_eq!(score("d"), Some(-0.3));
    }

    #[test]
    fn unscored_root() {
        let mut v = twelve();
        v[4].score = None;
        let f = SynsetForest::build(v).unwrap();
        assert_eq!(f.propagate_scores(), Err(OntologyError::UnscoredRoot(SynsetId::new("act"))));
    }

    #[test]
    fn search_by_prefix() {
        let f = SynsetForest::build(twelve()).unwrap();
        let names: Vec<String> = f.search("gir", None).iter().map(|s| s.display_name()).collect();
        assert_eq!(names, ["girl#1"]);
        assert!(f.search("zzz", None).is_empty());
        assert_eq!(f.search("", Some(Pos::Noun)).len(), 4);
        assert_eq!(f.search("CU", None).len(), 2);
    }

    #[test]
    fn canonical_order_is_input_independent() {
        let mut v = twelve();
        let a = SynsetForest::build(v.clone()).unwrap();
        v.reverse();
        let b = SynsetForest::build(v).unwrap();
        assert_eq!(a.synsets(), b.synsets());
    }
}
