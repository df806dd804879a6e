#include "casetwin/text.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

namespace casetwin {

ParseError::ParseError(SourcePos pos, std::string message)
    : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message),
      pos_(pos),
      message_(std::move(message)) {}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return buf.str();
}

void write_text_file_atomic(const std::string& path, std::string_view contents) {
  const std::string tmp = path + ".tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw IoError("cannot create '" + tmp + "'");
  std::size_t written = 0;
  while (written < contents.size()) {
    ssize_t n = ::write(fd, contents.data() + written, contents.size() - written);
    if (n < 0) {
      ::close(fd);
      throw IoError("write failed for '" + tmp + "'");
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) throw IoError("flush failed for '" + tmp + "'");
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

std::string describe(const Token& token) {
  switch (token.kind) {
    case TokenKind::End: return "end of input";
    case TokenKind::String: return "string \"" + token.text + "\"";
    default: return "'" + token.text + "'";
  }
}

Lexer::Lexer(std::string_view source) : src_(source) {}

void Lexer::skip_blank() {
  while (off_ < src_.size()) {
    char c = src_[off_];
    if (c == '\n') {
      ++pos_.line;
      pos_.column = 1;
      ++off_;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos_.column;
      ++off_;
    } else if (c == '/' && off_ + 1 < src_.size() && src_[off_ + 1] == '/') {
      while (off_ < src_.size() && src_[off_] != '\n') ++off_;
    } else {
      break;
    }
  }
}

Token Lexer::scan() {
  skip_blank();
  Token tok;
  tok.pos = pos_;
  tok.offset = off_;
  if (off_ >= src_.size()) return tok;

  auto advance = [&](std::size_t n) {
    off_ += n;
    pos_.column += static_cast<int>(n);
  };
  const char c = src_[off_];

  if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
    std::size_t end = off_;
    while (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) ++end;
    tok.kind = TokenKind::Identifier;
    tok.text = std::string(src_.substr(off_, end - off_));
    advance(end - off_);
    return tok;
  }

  if (std::isdigit(static_cast<unsigned char>(c))) {
    std::size_t end = off_;
    bool is_float = false;
    auto digits = [&] {
      while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
    };
    digits();
    if (end + 1 < src_.size() && src_[end] == '.' && std::isdigit(static_cast<unsigned char>(src_[end + 1]))) {
      is_float = true;
      ++end;
      digits();
    }
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t save = end++;
      if (end < src_.size() && (src_[end] == '+' || src_[end] == '-')) ++end;
      if (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) {
        is_float = true;
        digits();
      } else {
        end = save;
      }
    }
    tok.kind = is_float ? TokenKind::Float : TokenKind::Int;
    tok.text = std::string(src_.substr(off_, end - off_));
    advance(end - off_);
    return tok;
  }

  if (c == '"') {
    std::string value;
    std::size_t i = off_ + 1;
    while (i < src_.size() && src_[i] != '"') {
      if (src_[i] == '\n') throw ParseError(tok.pos, "unterminated string literal");
      if (src_[i] == '\\' && i + 1 < src_.size()) ++i;
      value += src_[i++];
    }
    if (i >= src_.size()) throw ParseError(tok.pos, "unterminated string literal");
    tok.kind = TokenKind::String;
    tok.text = std::move(value);
    advance(i + 1 - off_);
    return tok;
  }

  static constexpr std::string_view two_char[] = {"==", "!=", "<=", ">=", "&&", "||"};
  for (auto op : two_char) {
    if (src_.substr(off_, 2) == op) {
      tok.kind = TokenKind::Punct;
      tok.text = std::string(op);
      advance(2);
      return tok;
    }
  }
  static constexpr std::string_view single = "{}[](),;:.=<>!+-*/@";
  if (single.find(c) != std::string_view::npos) {
    tok.kind = TokenKind::Punct;
    tok.text = std::string(1, c);
    advance(1);
    return tok;
  }
  throw ParseError(tok.pos, std::string("unexpected character '") + c + "'");
}

const Token& Lexer::peek() {
  if (!has_peek_) {
    peeked_ = scan();
    has_peek_ = true;
  }
  return peeked_;
}

Token Lexer::next() {
  peek();
  has_peek_ = false;
  return std::move(peeked_);
}

bool Lexer::accept_punct(std::string_view p) {
  if (!is_punct(p)) return false;
  next();
  return true;
}

bool Lexer::accept_keyword(std::string_view k) {
  if (!is_keyword(k)) return false;
  next();
  return true;
}

Token Lexer::expect_punct(std::string_view p) {
  if (!is_punct(p)) fail(peek(), "expected '" + std::string(p) + "' but found " + describe(peek()));
  return next();
}

Token Lexer::expect_keyword(std::string_view k) {
  if (!is_keyword(k)) fail(peek(), "expected '" + std::string(k) + "' but found " + describe(peek()));
  return next();
}

Token Lexer::expect_identifier(std::string_view what) {
  if (peek().kind != TokenKind::Identifier) {
    fail(peek(), "expected " + std::string(what) + " but found " + describe(peek()));
  }
  return next();
}

double Lexer::expect_number(std::string_view what) {
  bool negative = accept_punct("-");
  const Token& tok = peek();
  if (tok.kind != TokenKind::Int && tok.kind != TokenKind::Float) {
    fail(tok, "expected " + std::string(what) + " but found " + describe(tok));
  }
  double value = 0;
  std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
  next();
  return negative ? -value : value;
}

std::string Lexer::raw_parenthesized() {
  if (has_peek_) {
    off_ = peeked_.offset;
    pos_ = peeked_.pos;
    has_peek_ = false;
  }
  skip_blank();
  SourcePos start = pos_;
  if (off_ >= src_.size() || src_[off_] != '(') throw ParseError(start, "expected '('");
  int depth = 0;
  std::size_t begin = off_;
  while (off_ < src_.size()) {
    char c = src_[off_];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    ++off_;
    if (depth == 0) return std::string(src_.substr(begin, off_ - begin));
  }
  throw ParseError(start, "unbalanced parentheses");
}

void Lexer::fail(const Token& at, const std::string& message) const { throw ParseError(at.pos, message); }

void Lexer::fail_here(const std::string& message) { throw ParseError(peek().pos, message); }

}  // namespace casetwin
