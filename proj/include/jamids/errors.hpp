#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jamids {

// Base for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

// Bad cell content. Row is the 1-based data row (header excluded), col the 0-based column.
class ParseError : public Error {
public:
    ParseError(std::size_t row, std::size_t col, const std::string& what)
        : Error("row " + std::to_string(row) + ", column " + std::to_string(col) + ": " + what),
          row_(row), col_(col) {}
    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

class EmptyClassError : public Error {
public:
    using Error::Error;
};

class EmptyDatasetError : public Error {
public:
    using Error::Error;
};

class RankError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class NonFiniteError : public Error {
public:
    NonFiniteError(int epoch, const std::string& what)
        : Error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

class SingleClassError : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class DeadNetworkError : public Error {
public:
    using Error::Error;
};

}  // namespace jamids
