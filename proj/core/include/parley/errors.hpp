#pragma once

#include <stdexcept>
#include <string>

namespace parley {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or invalid message, frame or JSON record.
class MessageFormatError : public Error {
public:
    using Error::Error;
};

/// Unknown task, bad task expression, unreadable or malformed dataset.
class TaskError : public Error {
public:
    using Error::Error;
};

/// Downloaded file does not match its pinned checksum.
class ChecksumError : public TaskError {
public:
    using TaskError::TaskError;
};

/// An agent broke a framework contract (e.g. batch_act returned the wrong count).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Base for failures talking to out-of-process agents.
class RemoteError : public Error {
public:
    using Error::Error;
};

/// The remote agent did not answer within its timeout.
class AgentUnavailable : public RemoteError {
public:
    using RemoteError::RemoteError;
};

/// The connection to a remote agent or human is gone.
class SessionClosed : public RemoteError {
public:
    using RemoteError::RemoteError;
};

/// Handshake or state machine violation on the wire.
class ProtocolError : public RemoteError {
public:
    using RemoteError::RemoteError;
};

}  // namespace parley
