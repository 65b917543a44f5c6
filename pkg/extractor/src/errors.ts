/**
 * Error taxonomy shared by the library and the command line tool.
 *
 * ValidationError covers everything a caller can fix by changing inputs
 * (bad flags, unreadable texts, words outside the vocabulary); the CLI
 * maps it to exit code 2.  Anything else is treated as a runtime failure
 * and exits 1.
 */

export class ValidationError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ValidationError";
  }
}

/** A word that the subword inventory cannot spell; names the offending span. */
export class MisalignmentError extends ValidationError {
  constructor(message: string) {
    super(message);
    this.name = "MisalignmentError";
  }
}
