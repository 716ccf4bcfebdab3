#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cfp::tokenizer {

// Fixed 25-symbol vocabulary.
//
//   id  0 <cls>    id  1 <pad>    id  2 <eos>    id  3 <mask>
//   ids 4..23      A C D E F G H I K L M N P Q R S T V W Y
//   id 24          X (unknown residue)
//
// vocab.txt lists the symbols in this order, one per line; the 0-based line
// index is the id.
namespace token {
inline constexpr int kCls = 0;
inline constexpr int kPad = 1;
inline constexpr int kEos = 2;
inline constexpr int kMask = 3;
inline constexpr int kFirstResidue = 4;
inline constexpr int kUnknown = 24;
}  // namespace token

inline constexpr std::size_t kVocabSize = 25;
inline constexpr std::size_t kStandardResidues = 20;
inline constexpr std::string_view kResidueLetters = "ACDEFGHIKLMNPQRSTVWY";

class Vocabulary {
 public:
  static const Vocabulary& standard();

  [[nodiscard]] std::size_t size() const noexcept { return kVocabSize; }
  [[nodiscard]] const std::string& symbol(int id) const;
  // Residue letter (case-insensitive) to id; -1 when not in the vocabulary.
  [[nodiscard]] int residue_id(char letter) const noexcept;
  // Inverse for residue ids, '\0' for specials.
  [[nodiscard]] char residue_letter(int id) const noexcept;
  [[nodiscard]] static bool is_special(int id) noexcept { return id >= 0 && id < token::kFirstResidue; }

  [[nodiscard]] std::string to_text() const;
  void write(const std::string& path) const;

 private:
  Vocabulary();
  std::vector<std::string> symbols_;
  std::array<int, 256> letter_to_id_{};
};

// Encoded sequence: <cls> residues <eos> <pad>...
struct TokenSequence {
  std::vector<int> ids;
  // Real (non-PAD) tokens, including <cls> and <eos>.
  std::size_t length = 0;
  std::string source_id;

  [[nodiscard]] std::size_t residue_count() const noexcept { return length >= 2 ? length - 2 : 0; }
  // Copy without trailing padding.
  [[nodiscard]] TokenSequence trimmed() const;
};

// Throws EncodingError (1-based position) for letters outside the vocabulary
// and TruncationError when residues exceed max_len - 2.
TokenSequence encode(std::string_view residues, std::size_t max_len, std::string source_id = {});
// Encodes to exactly residues.size() + 2 tokens.
TokenSequence encode_exact(std::string_view residues, std::string source_id = {});
// Upper-case residue string of the real residues.
std::string decode(const TokenSequence& seq);

}  // namespace cfp::tokenizer
