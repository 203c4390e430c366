//! Answer balancing and split assignment.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::kg::EntityId;
use crate::Ratio;

use super::{stream_rng, QuestionRecord, DOWNSAMPLE_STREAM, SPLIT_STREAM};

/// Knobs for the standalone downsampling entry point.
#[derive(Debug, Clone)]
pub struct BalanceConfig {
    /// No hard answer may account for more than this fraction of questions.
    pub tau: Ratio,
    pub seed: u64,
}

/// Caps each hard answer's share of the dataset at `tau`. Questions in a
/// group over the cap are dropped uniformly at random; everything kept stays
/// in its original order. The cap is computed against the size of the
/// original list, not the shrinking one, so a single pass suffices.
pub fn downsample(questions: &[QuestionRecord], config: &BalanceConfig) -> Vec<QuestionRecord> {
    let mut rng = stream_rng(config.seed, DOWNSAMPLE_STREAM);
    downsample_with_rng(questions, config.tau, &mut rng)
}

pub(crate) fn downsample_with_rng(
    questions: &[QuestionRecord],
    tau: Ratio,
    rng: &mut ChaCha8Rng,
) -> Vec<QuestionRecord> {
    let total = questions.len();
    let keep_cap = tau.floor_scaled(total as u64) as usize;
    let mut groups: BTreeMap<EntityId, Vec<usize>> = BTreeMap::new();
    for (index, question) in questions.iter().enumerate() {
        groups.entry(question.hard_answer).or_default().push(index);
    }
    let mut keep = vec![true; total];
    for pool in groups.values_mut() {
        if !tau.lt_scaled(pool.len() as u64, total as u64) {
            continue;
        }
        pool.shuffle(rng);
        for &index in &pool[keep_cap..] {
            keep[index] = false;
        }
    }
    questions
        .iter()
        .enumerate()
        .filter(|(index, _)| keep[*index])
        .map(|(_, question)| question.clone())
        .collect()
}

/// Shuffles the questions and cuts them into train/validation/test pieces
/// sized by the given ratios. Remainder questions land in the test piece.
pub fn split(
    questions: Vec<QuestionRecord>,
    ratios: (u32, u32, u32),
    seed: u64,
) -> (Vec<QuestionRecord>, Vec<QuestionRecord>, Vec<QuestionRecord>) {
    let mut rng = stream_rng(seed, SPLIT_STREAM);
    split_with_rng(questions, ratios, &mut rng)
}

pub(crate) fn split_with_rng(
    mut questions: Vec<QuestionRecord>,
    ratios: (u32, u32, u32),
    rng: &mut ChaCha8Rng,
) -> (Vec<QuestionRecord>, Vec<QuestionRecord>, Vec<QuestionRecord>) {
    let (r_train, r_val, r_test) = ratios;
    let total = u128::from(r_train) + u128::from(r_val) + u128::from(r_test);
    assert!(total > 0, "split ratios must not all be zero");
    questions.shuffle(rng);
    let n = questions.len() as u128;
    let n_train = (n * u128::from(r_train) / total) as usize;
    let n_val = (n * u128::from(r_val) / total) as usize;
    let mut rest = questions.split_off(n_train);
    let test = rest.split_off(n_val);
    (questions, rest, test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::RuleType;
    use crate::kg::{PredicateId, Triple};
    use crate::llm::Direction;
    use std::collections::BTreeSet;

    fn question(id: usize, hard: u32) -> QuestionRecord {
        let hard = EntityId(hard);
        QuestionRecord {
            id: format!("q{id:05}"),
            question: format!("Who knows entity {id}?"),
            topic_entity: EntityId(1000),
            answers: BTreeSet::from([hard]),
            hard_answer: hard,
            predicate: PredicateId(0),
            direction: Direction::HeadAsTopic,
            rule_type: RuleType::Symmetry,
            removed_triple: Triple::new(EntityId(1000), PredicateId(0), hard),
        }
    }

    #[test]
    fn an_overrepresented_answer_is_cut_to_the_cap() {
        // Ten questions, five sharing hard answer 7. With tau = 1/5 the cap
        // is floor(10/5) = 2, so exactly three of the five are dropped and
        // every other group (all singletons) is untouched.
        let questions: Vec<QuestionRecord> = (0..10)
            .map(|i| question(i, if i < 5 { 7 } else { 100 + i as u32 }))
            .collect();
        let config = BalanceConfig { tau: Ratio::new(1, 5), seed: 9 };
        let kept = downsample(&questions, &config);
        assert_eq!(kept.len(), 7);
        let sevens = kept.iter().filter(|q| q.hard_answer == EntityId(7)).count();
        assert_eq!(sevens, 2);
        let ids: Vec<&str> = kept.iter().map(|q| q.id.as_str()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted, "surviving questions keep their original order");
    }

    #[test]
    fn tau_of_one_keeps_everything() {
        let questions: Vec<QuestionRecord> = (0..10).map(|i| question(i, 7)).collect();
        let config = BalanceConfig { tau: Ratio::new(1, 1), seed: 9 };
        assert_eq!(downsample(&questions, &config), questions);
    }

    #[test]
    fn downsampling_is_deterministic_per_seed() {
        let questions: Vec<QuestionRecord> =
            (0..30).map(|i| question(i, (i % 3) as u32)).collect();
        let config = BalanceConfig { tau: Ratio::new(1, 5), seed: 42 };
        assert_eq!(downsample(&questions, &config), downsample(&questions, &config));
    }

    #[test]
    fn ratios_carve_the_expected_sizes() {
        let questions: Vec<QuestionRecord> = (0..10).map(|i| question(i, i as u32)).collect();
        let (train, val, test) = split(questions.clone(), (8, 1, 1), 3);
        assert_eq!((train.len(), val.len(), test.len()), (8, 1, 1));

        let mut seen: Vec<String> = train
            .iter()
            .chain(&val)
            .chain(&test)
            .map(|q| q.id.clone())
            .collect();
        seen.sort();
        let mut expected: Vec<String> = questions.iter().map(|q| q.id.clone()).collect();
        expected.sort();
        assert_eq!(seen, expected, "splitting is a partition");
    }

    #[test]
    fn leftovers_go_to_test() {
        let questions: Vec<QuestionRecord> = (0..7).map(|i| question(i, i as u32)).collect();
        let (train, val, test) = split(questions, (2, 2, 2), 3);
        // floor(7*2/6) = 2 twice, remainder 3.
        assert_eq!((train.len(), val.len(), test.len()), (2, 2, 3));
    }

    #[test]
    #[should_panic(expected = "ratios")]
    fn all_zero_ratios_panic() {
        split(vec![question(0, 0)], (0, 0, 0), 3);
    }
}
