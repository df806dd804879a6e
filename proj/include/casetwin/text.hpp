#pragma once

// Tokenizer and error types shared by the .dm, .cb and .cs front-ends.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace casetwin {

struct SourcePos {
  int line = 1;
  int column = 1;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(SourcePos pos, std::string message);

  SourcePos pos() const { return pos_; }
  const std::string& message() const { return message_; }

 private:
  SourcePos pos_;
  std::string message_;
};

/// Thrown by file-reading helpers; the CLI maps it to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text_file(const std::string& path);
/// Writes to `path.tmp`, flushes to disk, then renames over `path`.
void write_text_file_atomic(const std::string& path, std::string_view contents);

enum class TokenKind { Identifier, Int, Float, String, Punct, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;  // identifier/punct text, decoded string contents, or number spelling
  SourcePos pos;
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view source);

  const Token& peek();
  Token next();

  bool at_end() { return peek().kind == TokenKind::End; }
  bool is_punct(std::string_view p) { return peek().kind == TokenKind::Punct && peek().text == p; }
  bool is_keyword(std::string_view k) { return peek().kind == TokenKind::Identifier && peek().text == k; }

  bool accept_punct(std::string_view p);
  bool accept_keyword(std::string_view k);
  Token expect_punct(std::string_view p);
  Token expect_keyword(std::string_view k);
  Token expect_identifier(std::string_view what);
  double expect_number(std::string_view what);

  /// Reads one balanced "( ... )" group verbatim starting at the next
  /// non-blank character. Used to hand PDDL literals to the s-expression reader.
  std::string raw_parenthesized();

  [[noreturn]] void fail(const Token& at, const std::string& message) const;
  [[noreturn]] void fail_here(const std::string& message);

 private:
  void skip_blank();
  Token scan();

  std::string_view src_;
  std::size_t off_ = 0;
  SourcePos pos_;
  bool has_peek_ = false;
  Token peeked_;
};

std::string describe(const Token& token);

}  // namespace casetwin
