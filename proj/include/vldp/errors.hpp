#pragma once

#include <stdexcept>
#include <string>

namespace vldp {

/// Group parameter generation or validation failed.
class GroupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No valid discretization exists for the requested (epsilon, width, d).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed frame or message body on the wire.
class FramingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A peer sent something the protocol does not allow.
class ProtocolViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Transport failure (disconnect, timeout).
class ChannelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace vldp
