#pragma once

#include <stdexcept>
#include <string>

namespace phreg {

// Base for every error the library raises. The CLI maps the concrete
// type onto a distinct exit code.
class Error : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

class InvalidImageError : public Error
{
public:
	using Error::Error;
};

class InvalidInputError : public Error
{
public:
	using Error::Error;
};

class DomainError : public Error
{
public:
	using Error::Error;
};

class ConfigError : public Error
{
public:
	using Error::Error;
};

class NotFoundError : public Error
{
public:
	using Error::Error;
};

class StorageError : public Error
{
public:
	using Error::Error;
};

// Persisted state disagrees with its commitments.
class IntegrityError : public Error
{
public:
	using Error::Error;
};

} // namespace phreg
