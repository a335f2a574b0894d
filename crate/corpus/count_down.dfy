method count_down(n: int) returns (c: int)
  requires n >= 0
  ensures c == 0
{
  c := n;
  while (c != 0)
    invariant 0 <= c
    decreases c
  {
    c := c - 1;
  }
}
