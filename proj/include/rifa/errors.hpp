/*
 * SPDX-License-Identifier: GPL-2.0-only
 */
#pragma once

#include <stdexcept>
#include <string>

namespace rifa
{

class InvalidArgument : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

class InvariantViolation : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

/// Raised by link geometry when the two nodes are already out of range.
class NotANeighbor : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

class DomainError : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

class InvalidState : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

class NoRoute : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error
{
  public:
    ParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what),
          m_line(line)
    {
    }

    int Line() const
    {
        return m_line;
    }

  private:
    int m_line;
};

class ValidationError : public std::runtime_error
{
  public:
    ValidationError(std::string key, const std::string& what)
        : std::runtime_error(key + ": " + what),
          m_key(std::move(key))
    {
    }

    const std::string& Key() const
    {
        return m_key;
    }

  private:
    std::string m_key;
};

class IoError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

} // namespace rifa
