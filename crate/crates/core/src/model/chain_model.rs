use super::{uniform, SequenceModel};
use crate::markov::{Token, TransitionMatrix};

/// The generating chain viewed as a sequence model: the next-token
/// distribution is the row of the last token.
#[derive(Debug, Clone)]
pub struct ChainModel {
    matrix: TransitionMatrix,
}

pub fn wrap_chain_as_model(matrix: TransitionMatrix) -> ChainModel {
    ChainModel { matrix }
}

impl ChainModel {
    pub fn matrix(&self) -> &TransitionMatrix {
        &self.matrix
    }
}

impl SequenceModel for ChainModel {
    fn vocab_size(&self) -> usize {
        self.matrix.size()
    }

    fn context_len(&self) -> usize {
        1
    }

    fn next_token_distribution(&self, context: &[Token]) -> Vec<f64> {
        match context.last() {
            Some(&t) if (t as usize) < self.matrix.size() => self.matrix.row(t as usize).to_vec(),
            _ => uniform(self.matrix.size()),
        }
    }
}
