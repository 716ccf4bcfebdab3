#include "cfp/tokenizer/vocabulary.hpp"

#include <cctype>
#include <fstream>

#include "cfp/errors.hpp"

namespace cfp::tokenizer {

Vocabulary::Vocabulary() {
  symbols_ = {"<cls>", "<pad>", "<eos>", "<mask>"};
  for (char c : kResidueLetters) symbols_.emplace_back(1, c);
  symbols_.emplace_back("X");
  letter_to_id_.fill(-1);
  for (std::size_t i = 0; i < kResidueLetters.size(); ++i) {
    const auto upper = static_cast<unsigned char>(kResidueLetters[i]);
    const int id = token::kFirstResidue + static_cast<int>(i);
    letter_to_id_[upper] = id;
    letter_to_id_[static_cast<unsigned char>(std::tolower(upper))] = id;
  }
  letter_to_id_['X'] = token::kUnknown;
  letter_to_id_['x'] = token::kUnknown;
}

const Vocabulary& Vocabulary::standard() {
  static const Vocabulary vocab;
  return vocab;
}

const std::string& Vocabulary::symbol(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= symbols_.size()) {
    throw LookupError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return symbols_[static_cast<std::size_t>(id)];
}

int Vocabulary::residue_id(char letter) const noexcept {
  return letter_to_id_[static_cast<unsigned char>(letter)];
}

char Vocabulary::residue_letter(int id) const noexcept {
  if (id < token::kFirstResidue || id > token::kUnknown) return '\0';
  return symbols_[static_cast<std::size_t>(id)][0];
}

std::string Vocabulary::to_text() const {
  std::string out;
  for (const auto& s : symbols_) out += s + "\n";
  return out;
}

void Vocabulary::write(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path);
  os << to_text();
}

TokenSequence TokenSequence::trimmed() const {
  TokenSequence out;
  out.ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(length));
  out.length = length;
  out.source_id = source_id;
  return out;
}

TokenSequence encode(std::string_view residues, std::size_t max_len, std::string source_id) {
  if (max_len < 2 || residues.size() > max_len - 2) {
    throw TruncationError("sequence '" + source_id + "' has " + std::to_string(residues.size()) +
                              " residues; max_len " + std::to_string(max_len) + " allows " +
                              std::to_string(max_len >= 2 ? max_len - 2 : 0),
                          0);
  }
  const Vocabulary& vocab = Vocabulary::standard();
  TokenSequence seq;
  seq.source_id = std::move(source_id);
  seq.ids.reserve(max_len);
  seq.ids.push_back(token::kCls);
  for (std::size_t i = 0; i < residues.size(); ++i) {
    const int id = vocab.residue_id(residues[i]);
    if (id < 0) {
      throw EncodingError("illegal residue '" + std::string(1, residues[i]) + "' at position " +
                              std::to_string(i + 1) + (seq.source_id.empty() ? "" : " of " + seq.source_id),
                          i + 1);
    }
    seq.ids.push_back(id);
  }
  seq.ids.push_back(token::kEos);
  seq.length = seq.ids.size();
  seq.ids.resize(max_len, token::kPad);
  return seq;
}

TokenSequence encode_exact(std::string_view residues, std::string source_id) {
  return encode(residues, residues.size() + 2, std::move(source_id));
}

std::string decode(const TokenSequence& seq) {
  const Vocabulary& vocab = Vocabulary::standard();
  std::string out;
  for (std::size_t i = 1; i + 1 < seq.length; ++i) {
    const char c = vocab.residue_letter(seq.ids[i]);
    out.push_back(c ? c : '?');
  }
  return out;
}

}  // namespace cfp::tokenizer
