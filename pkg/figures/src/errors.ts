/** Raised for anything a user can fix: bad paths, malformed or empty inputs. */
export class FigureError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "FigureError";
  }
}
