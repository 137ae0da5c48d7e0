#pragma once

#include <vector>

#include "lordd/corpus/conversation.hpp"

namespace lordd::corpus {

// Replaces the first guesser turn that contains the target word with
// "[MASK]" and drops everything after it. Throws MaskingError when no such
// turn exists or an earlier turn already gives the word away.
MaskedExample mask_conversation(const Conversation& conv);

// Inverse view used by the idempotence property: the masked turns with the
// mask replaced by the bare target word.
Conversation unmask(const MaskedExample& ex);

}  // namespace lordd::corpus
