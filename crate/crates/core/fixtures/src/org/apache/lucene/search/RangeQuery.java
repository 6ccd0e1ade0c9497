package org.apache.lucene.search;

import java.io.IOException;
import java.text.Collator;

import org.apache.lucene.index.IndexReader;
import org.apache.lucene.index.Term;
import org.apache.lucene.index.TermEnum;

/**
 * A Query that matches documents within an exclusive range of terms.
 */
public class RangeQuery extends Query
{
  private String field;
  private String lowerTerm;
  private String upperTerm;
  private boolean inclusive;
  private Collator collator;

  public RangeQuery(String field, String lowerTerm, String upperTerm, boolean inclusive, Collator collator)
  {
    if (lowerTerm == null && upperTerm == null)
      throw new IllegalArgumentException("At least one term must be non-null");
    this.field = field;
    this.lowerTerm = lowerTerm;
    this.upperTerm = upperTerm;
    this.inclusive = inclusive;
    this.collator = collator;
  }

  public RangeQuery(String field, String lowerTerm, String upperTerm, boolean inclusive)
  {
    this(field, lowerTerm, upperTerm, inclusive, null);
  }

  public Query rewrite(IndexReader reader) throws IOException {
    BooleanQuery query = new BooleanQuery(true);
    TermEnum enumerator = reader.terms(new Term(field, lowerTerm == null ? "" : lowerTerm));
    try {
      do {
        Term term = enumerator.term();
        if (term == null || !term.field().equals(field))
          break;
        if (upperTerm != null && term.text().compareTo(upperTerm) > 0)
          break;
        query.add(new TermQuery(term), BooleanClause.Occur.SHOULD);
      } while (enumerator.next());
    } finally {
      enumerator.close();
    }
    return query;
  }

  /** Returns the field name for this query */
  public String getField() {
    return field;
  }

  /** Returns the lower value of this range query */
  public String getLowerTerm() { return lowerTerm; }

  /** Returns the upper value of this range query */
  public String getUpperTerm() { return upperTerm; }

  /** Returns <code>true</code> if the range query is inclusive */
  public boolean isInclusive() { return inclusive; }

  /** Returns the collator used to determine range inclusion, if any. */
  public Collator getCollator() { return collator; }

  /** Prints a user-readable version of this query. */
  public String toString(String field)
  {
    StringBuffer buffer = new StringBuffer();
    if (!getField().equals(field))
    {
      buffer.append(getField());
      buffer.append(":");
    }
    buffer.append(inclusive ? "[" : "{");
    buffer.append(lowerTerm != null ? lowerTerm : "null");
    buffer.append(" TO ");
    buffer.append(upperTerm != null ? upperTerm : "null");
    buffer.append(inclusive ? "]" : "}");
    return buffer.toString();
  }

  /**
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   * Range bounds are compared term by term.
   * See the class documentation.
   */
  public boolean equals(Object o) {
      if (this == o) return true;
      if (!(o instanceof RangeQuery)) return false;
      final RangeQuery other = (RangeQuery) o;
      if (this.getBoost() != other.getBoost()) return false;
      if (this.inclusive != other.inclusive) return false;
      if (this.collator != null && ! this.collator.equals(other.collator)) // bug
          return false;
      if (this.lowerTerm != null ? !this.lowerTerm.equals(other.lowerTerm) : other.lowerTerm != null)
          return false;
      if (this.upperTerm != null ? !this.upperTerm.equals(other.upperTerm) : other.upperTerm != null)
          return false;
      return true;
  }

  /** Returns a hash code value for this object.*/
  public int hashCode() {
    int h = Float.floatToIntBits(getBoost());
    h ^= field.hashCode();
    h ^= lowerTerm != null ? lowerTerm.hashCode() : 0;
    h ^= (h << 25) | (h >>> 8);
    h ^= upperTerm != null ? upperTerm.hashCode() : 0;
    h ^= this.inclusive ? 0x2742E74A : 0;
    h ^= collator != null ? collator.hashCode() : 0;
    return h;
  }
}
